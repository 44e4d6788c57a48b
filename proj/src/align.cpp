#include "detangle/align.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "detangle/assignment.hpp"
#include "detangle/error.hpp"
#include "detangle/io.hpp"

namespace detangle {

const char* to_string(AlignmentMode mode) { return mode == AlignmentMode::kGreedy ? "greedy" : "injective"; }

AlignmentMode parse_alignment_mode(const std::string& name) {
  if (name == "greedy") return AlignmentMode::kGreedy;
  if (name == "injective") return AlignmentMode::kInjective;
  throw Error("unknown alignment mode '" + name + "'");
}

namespace {

void check_nonempty(const ImportanceMatrix& imp) {
  if (imp.num_factors == 0 || imp.num_neurons == 0) throw Error("importance matrix is empty");
}

bool all_zero(const ImportanceMatrix& imp) {
  return std::all_of(imp.values.begin(), imp.values.end(), [](double v) { return v == 0.0; });
}

double objective(const ImportanceMatrix& imp, const std::vector<std::size_t>& assignment) {
  double acc = 0.0;
  for (std::size_t j = 0; j < assignment.size(); ++j) acc += imp(j, assignment[j]);
  return acc;
}

double max_entry(const ImportanceMatrix& imp) {
  double hi = 0.0;
  for (double v : imp.values) hi = std::max(hi, v);
  return hi;
}

std::string factor_label(const std::vector<std::string>& names, std::size_t j) {
  return j < names.size() ? names[j] : "g" + std::to_string(j);
}

bool is_aligned(const Alignment& a, std::size_t j, std::size_t i) {
  return j < a.assignment.size() && a.assignment[j] == i;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

Alignment greedy_alignment(const ImportanceMatrix& imp) {
  check_nonempty(imp);
  Alignment out;
  out.mode = AlignmentMode::kGreedy;
  out.assignment.resize(imp.num_factors);
  for (std::size_t j = 0; j < imp.num_factors; ++j) {
    auto row = imp.row(j);
    out.assignment[j] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  out.objective = objective(imp, out.assignment);
  out.degenerate = all_zero(imp);
  return out;
}

Alignment injective_alignment(const ImportanceMatrix& imp) {
  check_nonempty(imp);
  if (imp.num_factors > imp.num_neurons)
    throw Error("injective alignment needs at least as many neurons as factors (" + std::to_string(imp.num_neurons) +
                " < " + std::to_string(imp.num_factors) + ")");
  Alignment out;
  out.mode = AlignmentMode::kInjective;
  if (all_zero(imp)) {
    out.assignment.resize(imp.num_factors);
    std::iota(out.assignment.begin(), out.assignment.end(), std::size_t{0});
    out.degenerate = true;
    out.objective = 0.0;
    return out;
  }
  auto best = lexicographic_max_weight_assignment(imp.num_factors, imp.num_neurons, imp.values);
  out.assignment = std::move(best.columns);
  out.objective = objective(imp, out.assignment);
  return out;
}

Alignment align(const ImportanceMatrix& imp, AlignmentMode mode) {
  return mode == AlignmentMode::kGreedy ? greedy_alignment(imp) : injective_alignment(imp);
}

std::string hinton_svg(const ImportanceMatrix& imp, const Alignment& alignment,
                       const std::vector<std::string>& factor_names) {
  constexpr double kCell = 40.0;
  constexpr double kInner = 36.0;
  constexpr double kLeft = 80.0;
  constexpr double kTop = 30.0;
  const double width = kLeft + kCell * static_cast<double>(imp.num_neurons) + 10.0;
  const double height = kTop + kCell * static_cast<double>(imp.num_factors) + 10.0;
  const double hi = max_entry(imp);

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fixed3(width) + "\" height=\"" +
       fixed3(height) + "\" viewBox=\"0 0 " + fixed3(width) + " " + fixed3(height) + "\">\n";
  s += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" + fixed3(width) + "\" height=\"" + fixed3(height) +
       "\" fill=\"#ffffff\"/>\n";
  for (std::size_t i = 0; i < imp.num_neurons; ++i) {
    double cx = kLeft + kCell * (static_cast<double>(i) + 0.5);
    s += "<text x=\"" + fixed3(cx) + "\" y=\"20.000\" font-size=\"12\" text-anchor=\"middle\">z" +
         std::to_string(i) + "</text>\n";
  }
  for (std::size_t j = 0; j < imp.num_factors; ++j) {
    double cy = kTop + kCell * (static_cast<double>(j) + 0.5);
    s += "<text x=\"" + fixed3(kLeft - 6.0) + "\" y=\"" + fixed3(cy + 4.0) +
         "\" font-size=\"12\" text-anchor=\"end\">" + xml_escape(factor_label(factor_names, j)) + "</text>\n";
  }
  for (std::size_t j = 0; j < imp.num_factors; ++j) {
    for (std::size_t i = 0; i < imp.num_neurons; ++i) {
      const double x0 = kLeft + kCell * static_cast<double>(i);
      const double y0 = kTop + kCell * static_cast<double>(j);
      const double side = hi > 0.0 ? kInner * imp(j, i) / hi : 0.0;
      if (side > 0.0) {
        const double off = (kCell - side) / 2.0;
        s += "<rect class=\"cell\" x=\"" + fixed3(x0 + off) + "\" y=\"" + fixed3(y0 + off) + "\" width=\"" +
             fixed3(side) + "\" height=\"" + fixed3(side) + "\" fill=\"#222222\"/>\n";
      }
      if (is_aligned(alignment, j, i)) {
        s += "<rect class=\"aligned\" x=\"" + fixed3(x0 + 1.0) + "\" y=\"" + fixed3(y0 + 1.0) + "\" width=\"" +
             fixed3(kCell - 2.0) + "\" height=\"" + fixed3(kCell - 2.0) +
             "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
      }
    }
  }
  s += "</svg>\n";
  return s;
}

std::string hinton_text(const ImportanceMatrix& imp, const Alignment& alignment,
                        const std::vector<std::string>& factor_names) {
  std::size_t label_width = 2;
  for (std::size_t j = 0; j < imp.num_factors; ++j)
    label_width = std::max(label_width, factor_label(factor_names, j).size());
  const double hi = max_entry(imp);

  std::string s(label_width, ' ');
  s += " ";
  for (std::size_t i = 0; i < imp.num_neurons; ++i) {
    std::string head = "z" + std::to_string(i);
    head.resize(10, ' ');
    s += " " + head;
  }
  while (!s.empty() && s.back() == ' ') s.pop_back();
  s += '\n';
  for (std::size_t j = 0; j < imp.num_factors; ++j) {
    std::string name = factor_label(factor_names, j);
    name.resize(label_width, ' ');
    std::string line = name + " ";
    for (std::size_t i = 0; i < imp.num_neurons; ++i) {
      int blocks = hi > 0.0 ? static_cast<int>(std::lround(8.0 * imp(j, i) / hi)) : 0;
      std::string cell(static_cast<std::size_t>(blocks), '#');
      cell.resize(8, ' ');
      bool mark = is_aligned(alignment, j, i);
      line += std::string(" ") + (mark ? "[" : " ") + cell + (mark ? "]" : " ");
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    s += line + '\n';
  }
  return s;
}

void export_hinton(const ImportanceMatrix& imp, const Alignment& alignment, const std::filesystem::path& path,
                   const std::vector<std::string>& factor_names) {
  write_file_atomic(path, hinton_svg(imp, alignment, factor_names));
}

}  // namespace detangle
