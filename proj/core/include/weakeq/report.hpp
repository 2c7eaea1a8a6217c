#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace weakeq {

struct ConditionItem {
  std::string id;
  std::optional<double> witness;  // grid point of the worst residual
  double worst = 0.0;
  bool pass = true;
  std::string note;
};

struct ConditionReport {
  std::vector<ConditionItem> items;

  [[nodiscard]] bool overall() const {
    return std::all_of(items.begin(), items.end(), [](const auto& i) { return i.pass; });
  }
  [[nodiscard]] const ConditionItem* find(const std::string& id) const {
    for (const auto& i : items)
      if (i.id == id) return &i;
    return nullptr;
  }
};

}  // namespace weakeq
