#include "fleetsim/scenario.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fleetsim/gpu.hpp"
#include "fleetsim/queueing.hpp"
#include "fleetsim/reliability.hpp"

namespace fleetsim {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

json parse_scalar(const std::string& raw, int line) {
  std::string v = trim(raw);
  if (v.empty()) fail(line, "missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') fail(line, "unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  errno = 0;
  char* end = nullptr;
  long long i = std::strtoll(v.c_str(), &end, 10);
  if (errno == 0 && end && *end == '\0') return i;
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (...) {
  }
  fail(line, "cannot parse value '" + v + "'");
}

json parse_value(const std::string& raw, int line) {
  std::string v = trim(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') fail(line, "unterminated array");
    json arr = json::array();
    std::string cur;
    bool in_str = false;
    for (char c : v.substr(1, v.size() - 2)) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        if (!trim(cur).empty()) arr.push_back(parse_scalar(cur, line));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!trim(cur).empty()) arr.push_back(parse_scalar(cur, line));
    return arr;
  }
  return parse_scalar(v, line);
}

std::string strip_comment(const std::string& line) {
  std::string out;
  bool in_str = false;
  for (char c : line) {
    if (c == '"') in_str = !in_str;
    if (c == '#' && !in_str) break;
    out += c;
  }
  return out;
}

std::vector<std::string> split_path(const std::string& s, int line) {
  std::vector<std::string> segs;
  std::string cur;
  for (char c : s) {
    if (c == '.') {
      segs.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  segs.push_back(trim(cur));
  for (const auto& seg : segs)
    if (seg.empty()) fail(line, "bad section name");
  return segs;
}

// Walk to (creating along the way) the table a path segment names; an array
// segment means its most recent element.
json* descend(json* node, const std::string& seg) {
  json& child = (*node)[seg];
  if (child.is_array()) {
    if (child.empty()) child.push_back(json::object());
    return &child.back();
  }
  if (child.is_null()) child = json::object();
  return &child;
}

json parse_toml_subset(const std::string& text) {
  json root = json::object();
  json* cur = &root;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.rfind("[[", 0) == 0) {
      if (line.size() < 5 || line.compare(line.size() - 2, 2, "]]") != 0)
        fail(lineno, "bad table-list header");
      auto segs = split_path(line.substr(2, line.size() - 4), lineno);
      json* node = &root;
      for (size_t i = 0; i + 1 < segs.size(); ++i) node = descend(node, segs[i]);
      json& arr = (*node)[segs.back()];
      if (arr.is_null()) arr = json::array();
      if (!arr.is_array()) fail(lineno, "section name already used for a table");
      arr.push_back(json::object());
      cur = &arr.back();
    } else if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "bad section header");
      auto segs = split_path(line.substr(1, line.size() - 2), lineno);
      json* node = &root;
      for (const auto& seg : segs) node = descend(node, seg);
      cur = node;
    } else {
      size_t eq = line.find('=');
      if (eq == std::string::npos) fail(lineno, "expected key = value");
      std::string key = trim(line.substr(0, eq));
      if (key.empty()) fail(lineno, "empty key");
      (*cur)[key] = parse_value(line.substr(eq + 1), lineno);
    }
  }
  return root;
}

json config_tree(const std::string& text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '{') {
      try {
        return json::parse(text);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("JSON parse error: ") + e.what());
      }
    }
    break;
  }
  return parse_toml_subset(text);
}

// --- typed accessors -------------------------------------------------------

double num_or(const json& o, const std::string& k, double dflt) {
  if (!o.contains(k)) return dflt;
  const json& v = o.at(k);
  if (!v.is_number()) throw ConfigError("'" + k + "' must be a number");
  return v.get<double>();
}

long int_or(const json& o, const std::string& k, long dflt) {
  if (!o.contains(k)) return dflt;
  const json& v = o.at(k);
  if (!v.is_number_integer()) throw ConfigError("'" + k + "' must be an integer");
  return v.get<long>();
}

std::string str_or(const json& o, const std::string& k, const std::string& dflt) {
  if (!o.contains(k)) return dflt;
  const json& v = o.at(k);
  if (!v.is_string()) throw ConfigError("'" + k + "' must be a string");
  return v.get<std::string>();
}

bool bool_or(const json& o, const std::string& k, bool dflt) {
  if (!o.contains(k)) return dflt;
  const json& v = o.at(k);
  if (!v.is_boolean()) throw ConfigError("'" + k + "' must be true or false");
  return v.get<bool>();
}

std::vector<double> num_array(const json& o, const std::string& k) {
  std::vector<double> out;
  const json& v = o.at(k);
  if (!v.is_array()) throw ConfigError("'" + k + "' must be an array");
  for (const json& e : v) {
    if (!e.is_number()) throw ConfigError("'" + k + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<long> int_array(const json& o, const std::string& k) {
  std::vector<long> out;
  const json& v = o.at(k);
  if (!v.is_array()) throw ConfigError("'" + k + "' must be an array");
  for (const json& e : v) {
    if (!e.is_number_integer()) throw ConfigError("'" + k + "' must hold integers");
    out.push_back(e.get<long>());
  }
  return out;
}

const GpuProfile& find_profile(const std::string& name) {
  for (const GpuProfile& g : builtin_profiles())
    if (g.name == name) return g;
  throw ConfigError("unknown GPU profile '" + name + "'");
}

RouterConfig parse_router(const json& o) {
  RouterConfig rc;
  std::string k = str_or(o, "kind", "length");
  if (k == "length")
    rc.kind = RouterConfig::Kind::Length;
  else if (k == "compress")
    rc.kind = RouterConfig::Kind::Compress;
  else if (k == "random")
    rc.kind = RouterConfig::Kind::Random;
  else if (k == "model")
    rc.kind = RouterConfig::Kind::Model;
  else
    throw ConfigError("unknown router kind '" + k + "'");
  rc.b_short = int_or(o, "b_short", rc.b_short);
  rc.gamma = num_or(o, "gamma", rc.gamma);
  rc.uniform = bool_or(o, "uniform", false);
  if (o.contains("weights")) rc.weights = num_array(o, "weights");
  if (o.contains("tags")) {
    const json& t = o.at("tags");
    if (!t.is_object()) throw ConfigError("'tags' must map model names to pool indices");
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (!it.value().is_number_integer()) throw ConfigError("tag pools must be integers");
      rc.tag_to_pool[it.key()] = it.value().get<int>();
    }
  }
  return rc;
}

WorkloadSpec parse_workload(const json& o, const std::string& base_dir) {
  WorkloadSpec w;
  if (o.contains("cdf")) {
    std::string p = str_or(o, "cdf", "");
    if (!p.empty() && p.front() != '/') p = base_dir + "/" + p;
    try {
      w.cdf = load_cdf_file(p);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("loading workload CDF: ") + e.what());
    }
  } else if (o.contains("synthetic")) {
    SyntheticDist d;
    std::string k = str_or(o, "synthetic", "");
    if (k == "pareto")
      d.kind = SyntheticDist::Kind::Pareto;
    else if (k == "lognormal")
      d.kind = SyntheticDist::Kind::Lognormal;
    else
      throw ConfigError("unknown synthetic distribution '" + k + "'");
    d.shape = num_or(o, "shape", d.shape);
    d.scale = num_or(o, "scale", d.scale);
    d.truncation_max = int_or(o, "max_tokens", d.truncation_max);
    w.cdf = discretize(d, static_cast<int>(int_or(o, "points", 512)));
  } else {
    throw ConfigError("[workload] needs a 'cdf' file or a 'synthetic' distribution");
  }
  w.arrival_rate = num_or(o, "lambda", 1.0);
  w.prompt_fraction = num_or(o, "phi", 0.5);
  if (w.arrival_rate <= 0) throw ConfigError("workload lambda must be > 0");
  if (w.prompt_fraction <= 0 || w.prompt_fraction >= 1)
    throw ConfigError("workload phi must be in (0,1)");
  return w;
}

SweepSpace parse_sweep(const json& o, double slo_s) {
  SweepSpace sp;
  sp.slo_p99_ttft_s = slo_s;
  sp.b_short_grid = int_array(o, "b_short_grid");
  if (!o.contains("gpus")) throw ConfigError("[sweep] needs a 'gpus' list");
  for (const json& e : o.at("gpus")) {
    if (!e.is_string()) throw ConfigError("'gpus' must hold profile names");
    sp.gpu_catalog.push_back(find_profile(e.get<std::string>()));
  }
  sp.rho_cap = num_or(o, "rho_cap", sp.rho_cap);
  sp.c_max = static_cast<int>(int_or(o, "c_max", sp.c_max));
  sp.allow_mixed_types = bool_or(o, "allow_mixed", sp.allow_mixed_types);
  sp.long_context_bound = int_or(o, "long_context", 0);
  if (o.contains("node_avail")) {
    const json& v = o.at("node_avail");
    double a = 0;
    if (v.is_string())
      a = availability_constant(v.get<std::string>());
    else if (v.is_number())
      a = v.get<double>();
    else
      throw ConfigError("'node_avail' must be a constant name or a number");
    if (a <= 0 || a > 1) throw ConfigError("node_avail must be in (0,1]");
    sp.node_avail = a;
  }
  return sp;
}

PoolConfig parse_pool(const json& o) {
  if (!o.contains("gpu") || !o.contains("count") || !o.contains("context"))
    throw ConfigError("each pool needs gpu, count and context");
  PoolConfig pc{find_profile(str_or(o, "gpu", "")), static_cast<int>(int_or(o, "count", 1)),
                int_or(o, "context", 8192)};
  if (pc.gpu_count < 1) throw ConfigError("pool count must be >= 1");
  if (pc.context_bound < 1) throw ConfigError("pool context must be >= 1");
  return pc;
}

std::string dirname_of(const std::string& path) {
  size_t p = path.find_last_of('/');
  return p == std::string::npos ? std::string(".") : path.substr(0, p);
}

}  // namespace

std::string config_to_json(const std::string& text) { return config_tree(text).dump(2); }

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  json tree = config_tree(buf.str());
  if (!tree.is_object()) throw ConfigError("scenario must be a table of sections");

  try {
    Scenario sc;
    sc.title = str_or(tree, "title", "");
    if (!tree.contains("workload")) throw ConfigError("scenario needs a [workload] section");
    sc.workload = parse_workload(tree.at("workload"), dirname_of(path));

    if (tree.contains("slo")) {
      const json& s = tree.at("slo");
      sc.slo_p99_ttft_s = num_or(s, "p99_ttft_ms", 0) / 1000.0;
      if (s.contains("tpot_ms")) sc.tpot_slo_s = num_or(s, "tpot_ms", 0) / 1000.0;
    }
    if (tree.contains("router")) sc.router = parse_router(tree.at("router"));
    if (tree.contains("sweep")) sc.sweep = parse_sweep(tree.at("sweep"), sc.slo_p99_ttft_s);

    if (tree.contains("variant")) {
      const json& vs = tree.at("variant");
      if (!vs.is_array()) throw ConfigError("[[variant]] must be a list of tables");
      int i = 0;
      for (const json& v : vs) {
        VariantSpec spec;
        spec.name = str_or(v, "name", "variant" + std::to_string(i));
        if (!v.contains("pool")) throw ConfigError("variant '" + spec.name + "' has no pools");
        for (const json& p : v.at("pool")) spec.fleet.pools.push_back(parse_pool(p));
        spec.fleet.router = v.contains("router") ? parse_router(v.at("router")) : sc.router;
        sc.variants.push_back(std::move(spec));
        ++i;
      }
    }

    if (tree.contains("sim")) {
      const json& s = tree.at("sim");
      sc.sim.requests = int_or(s, "requests", sc.sim.requests);
      sc.sim.seed = static_cast<std::uint64_t>(int_or(s, "seed", 1));
      sc.sim.warmup = int_or(s, "warmup", -1);
      sc.sim.window_s = num_or(s, "window_s", 0);
      sc.sim.batch_cap = static_cast<int>(int_or(s, "batch_cap", 0));
    }

    if (tree.contains("whatif")) sc.whatif_grid = num_array(tree.at("whatif"), "lambda_grid");

    if (tree.contains("disagg")) {
      const json& d = tree.at("disagg");
      DisaggScenario ds;
      if (d.contains("gpus"))
        for (const json& e : d.at("gpus")) ds.gpus.push_back(e.get<std::string>());
      ds.decode_batch = static_cast<int>(int_or(d, "decode_batch", ds.decode_batch));
      ds.beta_ttft = num_or(d, "beta_ttft", ds.beta_ttft);
      ds.rho_cap = num_or(d, "rho_cap", ds.rho_cap);
      ds.context = int_or(d, "context", 0);
      sc.disagg = std::move(ds);
    }

    if (tree.contains("gridflex")) {
      const json& g = tree.at("gridflex");
      GridflexScenario gf;
      gf.gpu = str_or(g, "gpu", gf.gpu);
      gf.count = static_cast<int>(int_or(g, "count", gf.count));
      gf.context = int_or(g, "context", gf.context);
      gf.baseline_batch = static_cast<int>(int_or(g, "baseline_batch", gf.baseline_batch));
      if (g.contains("flex_grid")) gf.flex_grid = num_array(g, "flex_grid");
      gf.window_s = num_or(g, "window_s", gf.window_s);
      sc.gridflex = std::move(gf);
    }
    return sc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario structure: ") + e.what());
  }
}

std::vector<PoolAnalytic> analyze_fleet(const FleetConfig& fleet, const WorkloadSpec& w) {
  std::vector<PoolAnalytic> out(fleet.pools.size());
  bool lengthish = fleet.router.kind == RouterConfig::Kind::Length ||
                   fleet.router.kind == RouterConfig::Kind::Compress;
  std::vector<std::pair<double, double>> ranges;
  if (fleet.pools.size() == 1) {
    ranges.push_back({0.0, static_cast<double>(fleet.pools[0].context_bound)});
  } else if (fleet.pools.size() == 2 && lengthish) {
    double b = static_cast<double>(fleet.router.b_short);
    ranges.push_back({0.0, std::min(b, static_cast<double>(fleet.pools[0].context_bound))});
    ranges.push_back({b, static_cast<double>(fleet.pools[1].context_bound)});
  } else {
    return out;  // no analytical comparison for this shape
  }
  for (size_t i = 0; i < fleet.pools.size(); ++i) {
    const PoolConfig& pc = fleet.pools[i];
    auto [lo, hi] = ranges[i];
    hi = std::min(hi, w.cdf.max_tokens());
    if (hi <= lo) continue;
    double share = w.cdf.fraction_below(hi) - w.cdf.fraction_below(lo);
    if (share <= 1e-12) continue;
    try {
      int nm = n_max(pc.gpu, pc.context_bound);
      Moments mo = conditional_moments(w.cdf, lo, hi, [&](double total) {
        LengthSample ls = split_total(std::max(1L, std::lround(total)), w.prompt_fraction);
        return slot_hold_s(pc.gpu, ls.l_in, ls.l_out, pc.context_bound);
      });
      long q99 = std::max(1L, std::lround(conditional_quantile(w.cdf, lo, hi, 0.99)));
      long p99_l_in = split_total(q99, w.prompt_fraction).l_in;
      PoolLoad load{w.arrival_rate * share, mo.mean, mo.scv,
                    static_cast<long>(pc.gpu_count) * nm};
      QueueStats st = w99(load);
      PoolAnalytic& pa = out[i];
      pa.valid = true;
      pa.lambda = load.lambda;
      pa.rho = st.rho;
      pa.stable = st.stable;
      pa.p99_ttft_s = pool_p99_ttft_s(load, pc.gpu, pc.context_bound, p99_l_in);
    } catch (const std::runtime_error&) {
      out[i].valid = false;
    }
  }
  return out;
}

}  // namespace fleetsim
