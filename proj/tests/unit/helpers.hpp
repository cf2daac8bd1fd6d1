#pragma once

#include "securelat/linalg.hpp"
#include "securelat/sysid.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

namespace testing {

using securelat::Mat;
using securelat::Vec;

inline Mat reference_A() { return securelat::sysid::reference_model().mat_A; }
inline Mat reference_B() { return securelat::sysid::reference_model().mat_B; }

inline Mat random_matrix(securelat::Rng& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

/// Fresh, empty scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    auto p = std::filesystem::temp_directory_path() /
             ("securelat_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testing
