// SPDX-License-Identifier: Apache-2.0
//
// File formats: JSON model files, CSV datasets and traces, JSON reports.
// Doubles are written in shortest round-trip form so files reload bit-exactly.
#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "json.hpp"
#include "lipcap/bounds.hpp"
#include "lipcap/data.hpp"
#include "lipcap/genbound.hpp"
#include "lipcap/trainer.hpp"

namespace lipcap {

using Json = nlohmann::ordered_json;

inline constexpr int kModelVersion = 1;

Json model_to_json(const NetworkSpec& spec);
/// Parses and validates (validate_network); errors name the failing layer.
NetworkSpec model_from_json(const Json& j);

std::string serialize_model(const NetworkSpec& spec);
NetworkSpec parse_model(const std::string& text);

NetworkSpec load_model(const std::string& path);
void save_model(const NetworkSpec& spec, const std::string& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Header x0..x{d-1} followed by either `y` (integer class, one-hot encoded
/// with `classes` classes, default max label + 1), y0..y{k-1}, or nothing
/// (inputs only; targets are then empty vectors).
Dataset parse_dataset_csv(const std::string& text, std::optional<std::size_t> classes = std::nullopt);
Dataset load_dataset(const std::string& path, std::optional<std::size_t> classes = std::nullopt);
std::string dataset_to_csv(const Dataset& d);

inline constexpr const char* kTraceHeader =
    "step,epoch,layer,w_norm,pw_product,var_mean,var_max,inv_sigma_product,train_acc,train_loss";

std::string trace_to_csv(const TrainTrace& t);
TrainTrace parse_trace_csv(const std::string& text);

Json capacity_report_json(const CapacityReport& r);
Json genbound_report_json(const GenBoundReport& r);
Json optimization_report_json(const OptimizationReport& r);

std::string read_file(const std::string& path);
/// Writes via a temporary file and rename, so failures leave no partial file.
void write_file(const std::string& path, const std::string& content);

}  // namespace lipcap
