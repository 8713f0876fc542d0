#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "polyfield/model.hpp"

namespace polyfield {

/// Exact law over all k^(rows*cols) pixel arrays of a lattice. State index
/// i = sum_c (colour(c) - 1) * k^c over column-major cells c.
struct ExactTable {
    int rows = 0;
    int cols = 0;
    int k = 0;
    std::vector<double> log_weights;
    std::vector<double> probabilities;
    double z = 0.0;              ///< summed normalizer
    double z_closed_form = 0.0;  ///< NaN when a modifier is present or for marginals

    std::size_t size() const { return probabilities.size(); }
    PixelArray state(std::size_t index) const;
    std::size_t index_of(const PixelArray& p) const;
};

std::size_t state_index(const Mosaic& m);

/// `activities` holds rows + cols - 2 line activities (horizontals first).
ExactTable enumerate_exact(int rows, int cols, const ModelParams& p, std::span<const double> activities,
                           const GibbsModifier* modifier = nullptr, std::uint64_t cap = kEnumerationCap);

/// Activities of the lines surviving in the sub-rectangle.
std::vector<double> sub_activities(int rows, int cols, std::span<const double> activities, int row0, int col0,
                                   int sub_rows, int sub_cols);

/// Law of the pixel sub-array [row0, row0+sub_rows) x [col0, col0+sub_cols).
ExactTable marginal(const ExactTable& table, int row0, int col0, int sub_rows, int sub_cols);

/// Half the L1 distance. Throws InvalidArgument on size mismatch.
double tv_distance(std::span<const double> a, std::span<const double> b);

/// Maximum absolute deviation between the product of causal per-pixel
/// conditionals and the enumerated probability, over all states.
double factorisation_check(int rows, int cols, const ModelParams& p, std::span<const double> activities,
                           std::uint64_t cap = kEnumerationCap);

/// Product of per-pixel conditionals for one pixel array.
double factorised_probability(const PixelArray& x, const ModelParams& p, std::span<const double> activities);

/// Per segment, the exact probability that it carries an edge.
std::vector<double> segment_activity_probabilities(const ExactTable& table, const Tessellation& t);

/// CSV: state,pixels,log_weight,probability,z
void write_csv(const ExactTable& table, std::ostream& out);

} // namespace polyfield
