// SPDX-License-Identifier: Apache-2.0
//
// Standalone SVG line charts of training traces.
#pragma once

#include <string>
#include <vector>

#include "lipcap/trainer.hpp"

namespace lipcap {

enum class Panel { Norms, Pw, Variance, Reduction };

std::string to_string(Panel p);
Panel parse_panel(const std::string& name);

struct PlotOptions {
  std::vector<Panel> panels{Panel::Norms, Panel::Pw, Panel::Variance, Panel::Reduction};
  bool log_scale = false;  // log10 y axis; needs positive values
  int width = 640;
  int panel_height = 260;
};

/// One stacked panel per selection: per-layer weight norms, P_w, mean
/// pre-normalization variance per layer, and the normalizer factor product.
/// Throws ConfigError on an empty trace. Output depends only on the inputs.
std::string emit_svg_plot(const TrainTrace& trace, const PlotOptions& opts = {});

}  // namespace lipcap
