#pragma once

#include <string>

#include "genesis/sweep.hpp"

namespace genesis {

// Parses a run_sweep CSV back into cells (comment lines skipped).
// Throws ParseError on missing columns or malformed rows.
SweepResult sweep_from_csv(const std::string& text);

// One panel (a transmission-law/recovery-law pair) rendered as an SVG 1.1
// heatmap of -eta over (mu_t, mu_r/lambda_max), diverging colormap centered
// at zero, zero-level contour overlaid, numeric output fixed to %.6g so
// identical input yields byte-identical SVG. Throws std::invalid_argument
// when the panel has no cells.
std::string render_heatmap(const SweepResult& result,
                           const std::string& panel_trans,
                           const std::string& panel_rec);

}  // namespace genesis
