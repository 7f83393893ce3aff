#pragma once

#include <filesystem>
#include <fstream>

#include "dynega/ingest.hpp"
#include "dynega/simgen.hpp"

namespace testsupport {

// pool.csv + embeddings.csv for a synthetic pool; returns the pool.
inline dynega::SyntheticPool write_synthetic_fixture(const std::filesystem::path& dir,
                                                     const dynega::SyntheticSpec& spec) {
    auto pool = dynega::generate_synthetic_pool(spec);
    std::ofstream out(dir / "pool.csv");
    out << "id,text,dimension\n";
    const auto& ids = pool.embeddings.item_ids();
    for (std::size_t i = 0; i < ids.size(); ++i)
        out << ids[i] << ",item " << i << ",dim" << pool.truth[i] << '\n';
    out.close();
    dynega::save_embeddings_csv(pool.embeddings, dir / "embeddings.csv");
    return pool;
}

} // namespace testsupport
