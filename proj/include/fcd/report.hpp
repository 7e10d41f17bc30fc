#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fcd/format.hpp"

namespace fcd {

/// Evaluation metrics for one prediction; absent entries were not computed.
struct MetricReport {
  std::optional<double> cd_l1, cd_l2, dcd, emd, fscore, hausdorff, p2f, fidelity;

  static constexpr std::array<std::string_view, 8> columns{"cd_l1", "cd_l2", "dcd", "emd",
                                                          "fscore", "hausdorff", "p2f", "fidelity"};

  std::array<const std::optional<double>*, 8> fields() const {
    return {&cd_l1, &cd_l2, &dcd, &emd, &fscore, &hausdorff, &p2f, &fidelity};
  }

  /// Flat object in fixed column order; absent metrics are null.
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    const auto f = fields();
    for (std::size_t k = 0; k < columns.size(); ++k)
      j[std::string(columns[k])] = *f[k] ? nlohmann::ordered_json(**f[k]) : nlohmann::ordered_json(nullptr);
    return j;
  }

  static std::string csv_header() {
    std::string h;
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (k) h += ',';
      h += columns[k];
    }
    return h;
  }

  /// Values in `columns` order, shortest round-trip formatting, empty when absent.
  std::string csv_row() const {
    std::string row;
    const auto f = fields();
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (k) row += ',';
      row += format_optional(*f[k]);
    }
    return row;
  }
};

}  // namespace fcd
