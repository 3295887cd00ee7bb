#include "fss/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fss/error.hpp"
#include "fss/io.hpp"

namespace fss {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorKind::config, "invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v);
  return out;
}

int parse_int(std::string_view key, std::string_view v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

std::uint64_t parse_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v);
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"n_candidates", [](RunConfig& c, auto k, auto v) { c.fss.n_candidates = parse_int(k, v); }},
      {"k", [](RunConfig& c, auto k, auto v) { c.fss.k = parse_int(k, v); }},
      {"m", [](RunConfig& c, auto k, auto v) { c.fss.m = parse_int(k, v); }},
      {"init_rule",
       [](RunConfig& c, auto k, auto v) {
         try {
           c.fss.init_rule = parse_init_rule(v);
         } catch (const Error&) {
           bad_value(k, v);
         }
       }},
      {"step_mm", [](RunConfig& c, auto k, auto v) { c.tracking.step_mm = parse_double(k, v); }},
      {"max_angle_deg", [](RunConfig& c, auto k, auto v) { c.tracking.max_angle_deg = parse_double(k, v); }},
      {"fa_min", [](RunConfig& c, auto k, auto v) { c.tracking.fa_min = parse_double(k, v); }},
      {"min_length_mm", [](RunConfig& c, auto k, auto v) { c.tracking.min_length_mm = parse_double(k, v); }},
      {"max_extrap_fraction",
       [](RunConfig& c, auto k, auto v) { c.tracking.max_extrap_fraction = parse_double(k, v); }},
      {"poly_order", [](RunConfig& c, auto k, auto v) { c.tracking.poly_order = parse_int(k, v); }},
      {"point_stride", [](RunConfig& c, auto k, auto v) { c.tracking.point_stride = parse_int(k, v); }},
      {"r2_threshold", [](RunConfig& c, auto k, auto v) { c.r2_threshold = parse_double(k, v); }},
      {"sdcv_support",
       [](RunConfig& c, auto k, auto v) {
         try {
           c.sdcv_support = parse_sdcv_support(v);
         } catch (const Error&) {
           bad_value(k, v);
         }
       }},
      {"ml_source",
       [](RunConfig& c, auto k, auto v) {
         try {
           c.ml_source = parse_ml_source(v);
         } catch (const Error&) {
           bad_value(k, v);
         }
       }},
      {"seed_spacing_mm", [](RunConfig& c, auto k, auto v) { c.seed_spacing_mm = parse_double(k, v); }},
      {"n_slices", [](RunConfig& c, auto k, auto v) { c.n_slices = parse_int(k, v); }},
      {"equalize_candidates", [](RunConfig& c, auto k, auto v) { c.equalize_candidates = parse_bool(k, v); }},
      {"sample_seed", [](RunConfig& c, auto k, auto v) { c.sample_seed = parse_u64(k, v); }},
      {"output_dir",
       [](RunConfig& c, auto k, auto v) {
         if (v.empty()) bad_value(k, v);
         c.output_dir = std::string(v);
       }},
  };
  return table;
}

}  // namespace

std::string to_string(InitRule r) { return r == InitRule::longest ? "longest" : "index"; }
std::string to_string(SdcvSupport s) { return s == SdcvSupport::all ? "all" : "nonzero"; }
std::string to_string(MlSource s) { return s == MlSource::tracts ? "tracts" : "mask"; }

InitRule parse_init_rule(std::string_view s) {
  if (s == "longest") return InitRule::longest;
  if (s == "index") return InitRule::index;
  throw Error(ErrorKind::config, "init rule must be 'longest' or 'index'");
}

SdcvSupport parse_sdcv_support(std::string_view s) {
  if (s == "all") return SdcvSupport::all;
  if (s == "nonzero") return SdcvSupport::nonzero;
  throw Error(ErrorKind::config, "sdcv support must be 'all' or 'nonzero'");
}

MlSource parse_ml_source(std::string_view s) {
  if (s == "tracts") return MlSource::tracts;
  if (s == "mask") return MlSource::mask;
  throw Error(ErrorKind::config, "ml source must be 'tracts' or 'mask'");
}

void validate(const RunConfig& cfg) {
  validate(cfg.tracking);
  if (cfg.fss.n_candidates < 1) throw Error(ErrorKind::config, "n_candidates must be at least 1");
  if (cfg.fss.k < 1 || cfg.fss.k > cfg.fss.n_candidates) {
    throw Error(ErrorKind::config, "k must lie in [1, n_candidates]");
  }
  if (cfg.fss.m < 2) throw Error(ErrorKind::config, "m must be at least 2");
  if (!(cfg.r2_threshold >= 0.0 && cfg.r2_threshold <= 1.0)) {
    throw Error(ErrorKind::config, "r2_threshold must lie in [0, 1]");
  }
  if (!(cfg.seed_spacing_mm >= 0.0)) throw Error(ErrorKind::config, "seed_spacing_mm must be non-negative");
  if (cfg.n_slices < 1) throw Error(ErrorKind::config, "n_slices must be at least 1");
  if (cfg.output_dir.empty()) throw Error(ErrorKind::config, "output_dir must not be empty");
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw Error(ErrorKind::config, "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) {
      throw Error(ErrorKind::config, "key '" + std::string(key) + "' given twice");
    }
    it->second(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::config, e.what());
  }
  return parse_run_config(text);
}

std::string to_text(const RunConfig& c) {
  std::ostringstream out;
  out << "n_candidates = " << c.fss.n_candidates << '\n'
      << "k = " << c.fss.k << '\n'
      << "m = " << c.fss.m << '\n'
      << "init_rule = " << to_string(c.fss.init_rule) << '\n'
      << "step_mm = " << format_number(c.tracking.step_mm) << '\n'
      << "max_angle_deg = " << format_number(c.tracking.max_angle_deg) << '\n'
      << "fa_min = " << format_number(c.tracking.fa_min) << '\n'
      << "min_length_mm = " << format_number(c.tracking.min_length_mm) << '\n'
      << "max_extrap_fraction = " << format_number(c.tracking.max_extrap_fraction) << '\n'
      << "poly_order = " << c.tracking.poly_order << '\n'
      << "point_stride = " << c.tracking.point_stride << '\n'
      << "r2_threshold = " << format_number(c.r2_threshold) << '\n'
      << "sdcv_support = " << to_string(c.sdcv_support) << '\n'
      << "ml_source = " << to_string(c.ml_source) << '\n'
      << "seed_spacing_mm = " << format_number(c.seed_spacing_mm) << '\n'
      << "n_slices = " << c.n_slices << '\n'
      << "equalize_candidates = " << (c.equalize_candidates ? "true" : "false") << '\n'
      << "sample_seed = " << c.sample_seed << '\n'
      << "output_dir = " << c.output_dir << '\n';
  return out.str();
}

}  // namespace fss
