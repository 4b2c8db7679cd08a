#include "treemem/source.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "treemem/errors.hpp"

namespace treemem {

Source::Source() = default;

Source::Source(FuncSpec expr) : backend_(Backend::expr), expr_(std::move(expr)) {
  if (expr_->kind() != FuncKind::source)
    throw Error(Errc::InvalidConfig, "Source requires a source-kind expression");
  describe_ = expr_->text();
}

Source::Source(TableTag, std::vector<std::tuple<int, std::int64_t, double>> entries)
    : backend_(Backend::table) {
  for (const auto& [level, index, value] : entries) {
    if (level < 0 || index < 0)
      throw Error(Errc::InvalidConfig, "table entries need level >= 0 and index >= 0");
    table_[level][index] = value;
    if (level > table_max_level_) table_max_level_ = level;
  }
  describe_ = "table(" + std::to_string(entries.size()) + " entries)";
}

Source Source::zero() { return Source(); }

Source Source::from_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open table: " + path);
  std::vector<std::tuple<int, std::int64_t, double>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.find("level") != std::string::npos) continue;  // header
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw Error(Errc::ParseError, path + ": line " + std::to_string(lineno) +
                                        ": expected level,index,value");
    try {
      entries.emplace_back(std::stoi(a), std::stoll(b), std::stod(c));
    } catch (const std::exception&) {
      throw Error(Errc::ParseError,
                  path + ": line " + std::to_string(lineno) + ": malformed number");
    }
  }
  Source s(TableTag{}, std::move(entries));
  s.describe_ = "table:" + path;
  return s;
}

bool Source::level_only() const {
  switch (backend_) {
    case Backend::zero: return true;
    case Backend::expr: return expr_->level_only();
    case Backend::table: return table_.empty();
  }
  return true;
}

double Source::value(const NodeId& n, int m) const {
  switch (backend_) {
    case Backend::zero: return 0.0;
    case Backend::expr: return expr_->eval_source(n, m);
    case Backend::table: {
      auto lv = table_.find(n.level);
      if (lv == table_.end()) return 0.0;
      auto it = lv->second.find(n.index);
      return it == lv->second.end() ? 0.0 : it->second;
    }
  }
  return 0.0;
}

double Source::level_value(int level) const {
  if (!level_only()) throw Error(Errc::InvalidConfig, "source is not level-only");
  if (backend_ == Backend::expr)
    return expr_->eval_source_ks(static_cast<double>(level), 0.0);
  return 0.0;
}

std::optional<double> Source::exact_level_sup(int level) const {
  switch (backend_) {
    case Backend::zero: return 0.0;
    case Backend::expr:
      if (expr_->level_only()) return std::fabs(level_value(level));
      return std::nullopt;
    case Backend::table: {
      auto lv = table_.find(level);
      if (lv == table_.end()) return 0.0;
      double m = 0.0;
      for (const auto& [idx, v] : lv->second) m = std::fmax(m, std::fabs(v));
      return m;
    }
  }
  return std::nullopt;
}

double Source::sampled_level_sup(int level, int samples) const {
  if (auto e = exact_level_sup(level)) return *e;
  double sup = 0.0;
  for (int i = 0; i < samples; ++i) {
    double s = static_cast<double>(i) / (samples - 1);
    sup = std::fmax(sup, std::fabs(expr_->eval_source_ks(static_cast<double>(level), s)));
  }
  return sup;
}

std::optional<int> Source::table_max_level() const {
  if (backend_ != Backend::table) return std::nullopt;
  return table_max_level_;
}

void Source::fill_level(int level, int m, double* dst, std::int64_t n) const {
  switch (backend_) {
    case Backend::zero:
      for (std::int64_t i = 0; i < n; ++i) dst[i] = 0.0;
      return;
    case Backend::expr: {
      if (expr_->level_only()) {
        double v = level_value(level);
        for (std::int64_t i = 0; i < n; ++i) dst[i] = v;
        return;
      }
      const double denom = level_width_denom(m, level);
      for (std::int64_t i = 0; i < n; ++i)
        dst[i] = expr_->eval_source_ks(static_cast<double>(level),
                                       static_cast<double>(i) / denom);
      return;
    }
    case Backend::table: {
      auto lv = table_.find(level);
      for (std::int64_t i = 0; i < n; ++i) dst[i] = 0.0;
      if (lv == table_.end()) return;
      for (const auto& [idx, v] : lv->second)
        if (idx < n) dst[idx] = v;
      return;
    }
  }
}

}  // namespace treemem
