#include "nlheat/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nlheat/errors.hpp"

namespace nlheat {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot write '" + path.string() + "'");
  }
  return out;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_errors_csv(const std::filesystem::path& path, std::span<const StepRecord> errors) {
  auto out = open_out(path);
  out << "step,t,e_k\n";
  for (const StepRecord& r : errors) {
    out << r.step << ',' << format_double(r.t) << ',' << format_double(r.error) << '\n';
  }
}

void write_balance_csv(const std::filesystem::path& path, std::span<const BalanceRecord> balance) {
  auto out = open_out(path);
  out << "iteration,node,sd_count,busy_fraction,power,imbalance\n";
  for (const BalanceRecord& r : balance) {
    for (std::size_t i = 0; i < r.counts.size(); ++i) {
      out << r.iteration << ',' << i << ',' << r.counts[i] << ',' << format_double(r.busy_fraction[i])
          << ',' << format_double(r.power[i]) << ',' << format_double(r.imbalance[i]) << '\n';
    }
  }
}

void write_ownership_csv(const std::filesystem::path& path, std::span<const PartitionMap> history) {
  auto out = open_out(path);
  out << "iteration,sd_id,node_id\n";
  for (std::size_t it = 0; it < history.size(); ++it) {
    for (int sd = 0; sd < history[it].sd_count(); ++sd) {
      out << it << ',' << sd << ',' << history[it].owner(sd) << '\n';
    }
  }
}

void write_trace_jsonl(const std::filesystem::path& path, const EventTrace& trace) {
  auto out = open_out(path);
  trace.write_jsonl(out);
}

void write_field_csv(const std::filesystem::path& path, const Field& field) {
  auto out = open_out(path);
  const int n = field.spec().n();
  for (int i = 0; i < n; ++i) out << (i > 0 ? ",i" : "i") << i;
  out << '\n';
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i > 0) out << ',';
      out << format_double(field(i, j));
    }
    out << '\n';
  }
}

void write_partition_csv(const std::filesystem::path& path, const PartitionMap& pmap) {
  auto out = open_out(path);
  out << "sd_id,node_id\n";
  for (int sd = 0; sd < pmap.sd_count(); ++sd) {
    out << sd << ',' << pmap.owner(sd) << '\n';
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, std::span<const PlotSeries> series) {
  constexpr double width = 640, height = 420;
  constexpr double left = 70, right = 160, top = 40, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool any = false;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!any) {
        x0 = x1 = s.x[i];
        y1 = s.y[i];
        any = true;
      }
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  y0 = 0;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape_xml(title) << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double xv = x0 + (x1 - x0) * t / 5.0;
    const double yv = y0 + (y1 - y0) * t / 5.0;
    svg << "<text x=\"" << sx(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
        << format_double(std::round(xv * 100) / 100) << "</text>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
        << format_double(std::round(yv * 100) / 100) << "</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << sy(yv) << "\" x2=\"" << left + pw << "\" y2=\""
        << sy(yv) << "\" stroke=\"#dddddd\"/>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
      << escape_xml(x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape_xml(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = palette[k % std::size(palette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      svg << (i ? " " : "") << sx(s.x[i]) << ',' << sy(s.y[i]);
    }
    svg << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      svg << "<circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.y[i]) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    svg << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 35
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4 << "\">" << escape_xml(s.label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace nlheat
