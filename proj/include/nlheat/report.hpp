#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nlheat/kernel.hpp"
#include "nlheat/partition_map.hpp"
#include "nlheat/runtime.hpp"

namespace nlheat {

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

void write_errors_csv(const std::filesystem::path& path, std::span<const StepRecord> errors);
void write_balance_csv(const std::filesystem::path& path, std::span<const BalanceRecord> balance);
void write_ownership_csv(const std::filesystem::path& path, std::span<const PartitionMap> history);
void write_trace_jsonl(const std::filesystem::path& path, const EventTrace& trace);
// Header i0..i{n-1}, then n lines of n values, line j holding DPs (0..n-1, j);
// collar excluded.
void write_field_csv(const std::filesystem::path& path, const Field& field);
void write_partition_csv(const std::filesystem::path& path, const PartitionMap& pmap);
void write_text(const std::filesystem::path& path, const std::string& text);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Line plot with linear axes, one polyline and legend entry per series.
std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, std::span<const PlotSeries> series);

}  // namespace nlheat
