#pragma once

#include "diffsim/io.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace diffsim::recipes {

/// Knobs shared by the figure and table recipes. Zero means "recipe default".
struct RecipeOptions {
    std::size_t n = 0;
    std::uint64_t seed = 1;
    double delta = 0.0;
    unsigned threads = 1;
};

std::vector<std::string> names();

/// Runs the named recipe and returns its plot-ready table. Throws
/// std::invalid_argument for an unknown name.
CsvTable run(const std::string& name, const RecipeOptions& options);

} // namespace diffsim::recipes
