#include "sbcm/sweep.hpp"

#include "sbcm/io.hpp"
#include "sbcm/parallel.hpp"
#include "sbcm/steady.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

namespace sbcm {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) out.push_back(part);
  return out;
}

struct OutputFile {
  std::string filename;
  std::string header;
};

std::vector<OutputFile> output_files(const SweepSpec& spec) {
  const std::string base = spec.basename();
  const std::string counts = "gamma,delta,count";
  switch (spec.experiment) {
    case Experiment::family_counts: {
      const std::string other = spec.main_classification() == "full" ? "reduced" : "full";
      return {{base + ".csv", counts}, {base + "_" + other + ".csv", counts}};
    }
    case Experiment::line_counts: {
      const std::string other = spec.main_classification() == "full" ? "reduced" : "full";
      return {{base + ".csv", counts},
              {base + "_" + other + ".csv", counts},
              {base + "_diagonal.csv", counts}};
    }
    case Experiment::continuation:
      return {{base + ".csv", "gamma,delta,reason,critical_gamma,final_gamma,classification"}};
    case Experiment::enumerate:
      return {{base + ".csv", "gamma,delta,states,stable,unstable,marginal,failed"}};
    case Experiment::portrait:
      return {{base + ".csv", "gamma,delta,fixed_points,stable_full,stable_reduced,unresolved"}};
  }
  return {};
}

std::string cell_prefix(double gamma, double delta) {
  return format_double(gamma) + "," + format_double(delta);
}

std::vector<std::string> compute_cell(const SweepSpec& spec, const Topology& topo,
                                      std::size_t index, double gamma, double delta) {
  const ModelParams p{gamma, delta};
  const std::string pre = cell_prefix(gamma, delta);
  const bool main_full = spec.main_classification() == "full";
  switch (spec.experiment) {
    case Experiment::family_counts: {
      FamilySpec fam{spec.family, *topo.path_n};
      auto c = count_stable_family(fam, p, spec.scan_points > 0 ? spec.scan_points : 2001);
      const int main = main_full ? c.count_full : c.count_reduced;
      const int other = main_full ? c.count_reduced : c.count_full;
      return {pre + "," + std::to_string(main), pre + "," + std::to_string(other)};
    }
    case Experiment::line_counts: {
      const int pts = spec.scan_points > 0 ? spec.scan_points : 1001;
      auto a = count_stable_on_line(*topo.cliques, p, CliqueLine::anti_diagonal, pts);
      auto d = count_stable_on_line(*topo.cliques, p, CliqueLine::diagonal, pts);
      const int main = main_full ? a.count : a.count_reduced;
      const int other = main_full ? a.count_reduced : a.count;
      const int diag = main_full ? d.count : d.count_reduced;
      return {pre + "," + std::to_string(main), pre + "," + std::to_string(other),
              pre + "," + std::to_string(diag)};
    }
    case Experiment::continuation: {
      ContinuationOptions opts;
      opts.step = spec.continuation_step;
      auto br = continue_in_gamma(topo.graph, delta, gamma, opts);
      const auto& last = br.records.back();
      return {pre + "," + std::string(to_string(br.terminated_reason)) + "," +
              (br.critical_gamma ? format_double(*br.critical_gamma) : std::string()) + "," +
              format_double(br.gammas.back()) + "," +
              std::string(to_string(last.classification()))};
    }
    case Experiment::enumerate: {
      auto res = enumerate_steady_states(topo.graph, p, spec.n_starts, spec.seed + index);
      int counts[3] = {0, 0, 0};
      for (const auto& r : res.records) ++counts[static_cast<int>(r.classification())];
      return {pre + "," + std::to_string(res.records.size()) + "," + std::to_string(counts[0]) +
              "," + std::to_string(counts[1]) + "," + std::to_string(counts[2]) + "," +
              std::to_string(res.failed)};
    }
    case Experiment::portrait: {
      PortraitOptions opts;
      auto pp = phase_portrait(*topo.cliques, p, spec.grid, opts);
      write_portrait(spec.output_dir / (spec.basename() + "_" + std::to_string(index)), pp);
      int sf = 0, sr = 0;
      for (const auto& f : pp.fixed_points) {
        sf += f.full == Stability::stable;
        sr += f.reduced == Stability::stable;
      }
      return {pre + "," + std::to_string(pp.fixed_points.size()) + "," + std::to_string(sf) + "," +
              std::to_string(sr) + "," + std::to_string(pp.unresolved)};
    }
  }
  return {};
}

// Number of leading complete, well-formed rows in `path` that match the
// expected cells. Throws if the file belongs to a different sweep.
std::size_t complete_rows(const std::filesystem::path& path, const OutputFile& file,
                          const std::vector<std::string>& expected_prefix) {
  if (!std::filesystem::exists(path)) return 0;
  const std::string text = read_file(path);
  const std::size_t columns = split(file.header, ',').size();
  std::size_t pos = 0, rows = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // unterminated tail
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!header_seen) {
      if (line != file.header)
        throw ValidationError(path.string() + " has a different header; refusing to resume");
      header_seen = true;
      continue;
    }
    if (rows >= expected_prefix.size()) break;
    if (split_csv_line(line).size() != columns) break;
    if (line.rfind(expected_prefix[rows] + ",", 0) != 0)
      throw ValidationError(path.string() + " row " + std::to_string(rows + 1) +
                            " belongs to a different grid; refusing to resume");
    ++rows;
  }
  return rows;
}

}  // namespace

Topology resolve_topology(const std::string& spec) {
  Topology t;
  t.name = spec;
  auto parts = split(spec, ':');
  if (parts.empty()) throw ValidationError("empty topology");
  const std::string& kind = parts[0];
  if (kind == "path" && parts.size() == 2) {
    const int n = static_cast<int>(parse_integer(parts[1]));
    t.graph = path_graph(n);
    t.path_n = n;
  } else if (kind == "cliques" && parts.size() == 3) {
    Alignment a;
    if (parts[2] == "aligned")
      a = Alignment::aligned;
    else if (parts[2] == "unaligned")
      a = Alignment::unaligned;
    else
      throw ValidationError("alignment must be aligned or unaligned, got '" + parts[2] + "'");
    t.cliques = paired_cliques(static_cast<int>(parse_integer(parts[1])), a);
    t.graph = t.cliques->graph;
  } else if (kind == "karate" && parts.size() == 1) {
    t.graph = karate_club();
  } else if (kind == "file" && (parts.size() == 2 || parts.size() == 3)) {
    t.graph = load_graph(parts[1], parts.size() == 3 ? parts[2] : std::string());
  } else {
    throw ValidationError("unrecognized topology '" + spec + "'");
  }
  return t;
}

std::vector<double> AxisSpec::values() const {
  std::vector<double> out;
  if (points == 1) return {min};
  for (int k = 0; k < points; ++k) {
    const double f = static_cast<double>(k) / (points - 1);
    out.push_back(log ? std::exp(std::log(min) + f * (std::log(max) - std::log(min)))
                      : min + f * (max - min));
  }
  out.front() = min;
  out.back() = max;
  return out;
}

void AxisSpec::validate(const std::string& name) const {
  if (points < 1) throw ValidationError(name + " grid needs at least one point");
  if (!std::isfinite(min) || !std::isfinite(max) || min > max)
    throw ValidationError(name + " grid needs finite min <= max");
  if (min < 0.0) throw ValidationError(name + " values must be nonnegative");
  if (log && !(min > 0.0)) throw ValidationError(name + " log grid needs min > 0");
}

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::family_counts: return "family_counts";
    case Experiment::line_counts: return "line_counts";
    case Experiment::continuation: return "continuation";
    case Experiment::enumerate: return "enumerate";
    case Experiment::portrait: return "portrait";
  }
  return "unknown";
}

Experiment experiment_from_string(std::string_view s) {
  for (auto e : {Experiment::family_counts, Experiment::line_counts, Experiment::continuation,
                 Experiment::enumerate, Experiment::portrait})
    if (s == to_string(e)) return e;
  throw ValidationError("unknown experiment '" + std::string(s) + "'");
}

std::string SweepSpec::basename() const {
  return name.empty() ? std::string(to_string(experiment)) : name;
}

std::string SweepSpec::main_classification() const {
  if (!classification.empty()) return classification;
  return experiment == Experiment::family_counts ? "reduced" : "full";
}

void SweepSpec::validate() const {
  gamma.validate("gamma");
  delta.validate("delta");
  if (workers < 1) throw ValidationError("workers must be at least 1");
  if (!classification.empty() && classification != "full" && classification != "reduced")
    throw ValidationError("classification must be full or reduced");
  if (n_starts < 1) throw ValidationError("n_starts must be at least 1");
  if (name.find('/') != std::string::npos) throw ValidationError("name must not contain '/'");
}

SweepSpec sweep_spec_from_json(const std::string& text, SweepSpec s) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("<config>", 1, e.what());
  }
  try {
    auto axis = [](const nlohmann::json& a, AxisSpec& out) {
      if (a.contains("min")) out.min = a.at("min").get<double>();
      if (a.contains("max")) out.max = a.at("max").get<double>();
      if (a.contains("points")) out.points = a.at("points").get<int>();
      if (a.contains("scale")) {
        const auto sc = a.at("scale").get<std::string>();
        if (sc != "log" && sc != "linear") throw ValidationError("scale must be log or linear");
        out.log = sc == "log";
      }
    };
    for (const auto& [key, val] : j.items()) {
      if (key == "experiment")
        s.experiment = experiment_from_string(val.get<std::string>());
      else if (key == "topology")
        s.topology = val.get<std::string>();
      else if (key == "gamma")
        axis(val, s.gamma);
      else if (key == "delta")
        axis(val, s.delta);
      else if (key == "output")
        s.output_dir = val.get<std::string>();
      else if (key == "seed")
        s.seed = val.get<std::uint64_t>();
      else if (key == "workers")
        s.workers = val.get<int>();
      else if (key == "name")
        s.name = val.get<std::string>();
      else if (key == "family")
        s.family = family_kind_from_string(val.get<std::string>());
      else if (key == "classification")
        s.classification = val.get<std::string>();
      else if (key == "scan_points")
        s.scan_points = val.get<int>();
      else if (key == "n_starts")
        s.n_starts = val.get<int>();
      else if (key == "continuation_step")
        s.continuation_step = val.get<double>();
      else if (key == "grid") {
        if (val.contains("x_min")) s.grid.x_min = val.at("x_min").get<double>();
        if (val.contains("x_max")) s.grid.x_max = val.at("x_max").get<double>();
        if (val.contains("y_min")) s.grid.y_min = val.at("y_min").get<double>();
        if (val.contains("y_max")) s.grid.y_max = val.at("y_max").get<double>();
        if (val.contains("nx")) s.grid.nx = val.at("nx").get<int>();
        if (val.contains("ny")) s.grid.ny = val.at("ny").get<int>();
      } else {
        throw ValidationError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed sweep config: ") + e.what());
  }
  return s;
}

std::string sweep_spec_to_json(const SweepSpec& s) {
  auto axis = [](const AxisSpec& a) {
    nlohmann::ordered_json j;
    j["min"] = a.min;
    j["max"] = a.max;
    j["points"] = a.points;
    j["scale"] = a.log ? "log" : "linear";
    return j;
  };
  nlohmann::ordered_json j;
  j["experiment"] = std::string(to_string(s.experiment));
  j["topology"] = s.topology;
  j["gamma"] = axis(s.gamma);
  j["delta"] = axis(s.delta);
  j["output"] = s.output_dir.string();
  j["seed"] = s.seed;
  j["workers"] = s.workers;
  j["name"] = s.basename();
  j["family"] = std::string(to_string(s.family));
  j["classification"] = s.main_classification();
  j["scan_points"] = s.scan_points;
  j["n_starts"] = s.n_starts;
  j["continuation_step"] = s.continuation_step;
  j["grid"] = {{"x_min", s.grid.x_min}, {"x_max", s.grid.x_max}, {"y_min", s.grid.y_min},
               {"y_max", s.grid.y_max}, {"nx", s.grid.nx},       {"ny", s.grid.ny}};
  return j.dump(2);
}

std::string sweep_schema_json() {
  const auto axis = nlohmann::ordered_json{
      {"type", "object"},
      {"properties",
       {{"min", {{"type", "number"}}},
        {"max", {{"type", "number"}}},
        {"points", {{"type", "integer"}, {"minimum", 1}}},
        {"scale", {{"enum", {"linear", "log"}}}}}}};
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["sweep_config"] = {
      {"type", "object"},
      {"additionalProperties", false},
      {"properties",
       {{"experiment",
         {{"enum", {"family_counts", "line_counts", "continuation", "enumerate", "portrait"}}}},
        {"topology",
         {{"type", "string"},
          {"description", "path:N | cliques:K:aligned | cliques:K:unaligned | karate | "
                          "file:EDGES[:ZEALOTS]"}}},
        {"gamma", axis},
        {"delta", axis},
        {"output", {{"type", "string"}}},
        {"seed", {{"type", "integer"}, {"minimum", 0}}},
        {"workers", {{"type", "integer"}, {"minimum", 1}}},
        {"name", {{"type", "string"}}},
        {"family", {{"enum", {"polarized", "consensus"}}}},
        {"classification", {{"enum", {"reduced", "full"}}}},
        {"scan_points", {{"type", "integer"}, {"minimum", 0}}},
        {"n_starts", {{"type", "integer"}, {"minimum", 1}}},
        {"continuation_step", {{"type", "number"}}},
        {"grid",
         {{"type", "object"},
          {"properties",
           {{"x_min", {{"type", "number"}}},
            {"x_max", {{"type", "number"}}},
            {"y_min", {{"type", "number"}}},
            {"y_max", {{"type", "number"}}},
            {"nx", {{"type", "integer"}}},
            {"ny", {{"type", "integer"}}}}}}}}}};
  j["csv"] = {
      {"trajectory", "t,x_0,...,x_{n-1}"},
      {"steady_states", "gamma,delta,origin,classification,residual,x_0,...,x_{n-1}"},
      {"counts", "gamma,delta,count"},
      {"continuation", "gamma,delta,reason,critical_gamma,final_gamma,classification"},
      {"enumerate", "gamma,delta,states,stable,unstable,marginal,failed"},
      {"portrait_summary", "gamma,delta,fixed_points,stable_full,stable_reduced,unresolved"},
      {"fixed_points", "x1,x2,class_reduced,class_full"},
      {"nullclines", "component,segment,x1,x2"},
      {"basins", "x1,x2,attractor_id,polarization"}};
  return j.dump(2);
}

SweepSummary run_sweep(const SweepSpec& spec, std::ostream* log) {
  spec.validate();
  const Topology topo = resolve_topology(spec.topology);
  if (spec.experiment == Experiment::family_counts && !topo.path_n)
    throw ValidationError("family_counts needs a path:N topology");
  if ((spec.experiment == Experiment::line_counts || spec.experiment == Experiment::portrait) &&
      !topo.cliques)
    throw ValidationError(std::string(to_string(spec.experiment)) +
                          " needs a cliques:K:alignment topology");
  if (topo.path_n) FamilySpec{spec.family, *topo.path_n}.validate();

  const auto gammas = spec.gamma.values();
  const auto deltas = spec.delta.values();
  const std::size_t total = gammas.size() * deltas.size();
  std::vector<std::string> prefixes;
  prefixes.reserve(total);
  for (double d : deltas)
    for (double g : gammas) prefixes.push_back(cell_prefix(g, d));

  std::error_code ec;
  std::filesystem::create_directories(spec.output_dir, ec);
  if (ec || !std::filesystem::is_directory(spec.output_dir))
    throw Error("cannot create output directory " + spec.output_dir.string());

  const auto files = output_files(spec);
  SweepSummary summary;
  summary.cells = static_cast<int>(total);
  std::size_t done = total;
  for (const auto& f : files) {
    const auto path = spec.output_dir / f.filename;
    done = std::min(done, complete_rows(path, f, prefixes));
    summary.files.push_back(path);
  }

  // Rewrite every file to the common complete prefix, then append.
  std::vector<std::ofstream> outs;
  for (const auto& f : files) {
    const auto path = spec.output_dir / f.filename;
    std::string kept = f.header + "\n";
    if (done > 0) {
      const std::string text = read_file(path);
      std::size_t pos = text.find('\n') + 1;
      for (std::size_t r = 0; r < done; ++r) {
        const auto nl = text.find('\n', pos);
        kept += text.substr(pos, nl - pos + 1);
        pos = nl + 1;
      }
    }
    write_file(path, kept);
    outs.emplace_back(path, std::ios::app | std::ios::binary);
    if (!outs.back()) throw Error("cannot write " + path.string());
  }
  summary.resumed = static_cast<int>(done);
  if (log && done > 0) *log << "[sweep] resuming after " << done << " complete cells\n";

  std::mutex sink;
  std::map<std::size_t, std::vector<std::string>> pending;
  std::size_t next = done;
  parallel_for(total - done, spec.workers, [&](std::size_t k) {
    const std::size_t idx = done + k;
    const double g = gammas[idx % gammas.size()];
    const double d = deltas[idx / gammas.size()];
    const auto t0 = std::chrono::steady_clock::now();
    auto rows = compute_cell(spec, topo, idx, g, d);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::lock_guard lock(sink);
    pending.emplace(idx, std::move(rows));
    while (!pending.empty() && pending.begin()->first == next) {
      auto& r = pending.begin()->second;
      for (std::size_t f = 0; f < outs.size(); ++f) {
        outs[f] << r[f] << '\n';
        outs[f].flush();
      }
      pending.erase(pending.begin());
      ++next;
    }
    if (log)
      *log << "[sweep] cell " << idx + 1 << "/" << total << " gamma=" << format_double(g)
           << " delta=" << format_double(d) << " (" << wall << " s)\n";
  });
  summary.computed = static_cast<int>(total - done);
  return summary;
}

}  // namespace sbcm
