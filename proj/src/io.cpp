#include "ajcir/io.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ajcir {

using nlohmann::json;

namespace {

Eigen::VectorXd vector_from(const json& j, const char* name, int expect = -1) {
  if (!j.is_array())
    throw std::invalid_argument(std::string("model config: ") + name +
                                " must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  if (expect >= 0 && v.size() != expect)
    throw std::invalid_argument(std::string("model config: ") + name +
                                " has wrong length");
  return v;
}

TemperingFn tempering_from(const json& j) {
  TemperingFn g;
  const std::string type = j.at("type").get<std::string>();
  if (type == "constant") {
    g.kind = TemperingFn::Kind::Constant;
    g.c = j.at("c").get<double>();
    g.sup_bound = g.c;
    g.tail_first_moment_finite = false;
  } else if (type == "exponential") {
    g.kind = TemperingFn::Kind::Exponential;
    g.c = j.at("c").get<double>();
    g.a = j.at("a").get<double>();
    g.sup_bound = g.c;
    g.tail_first_moment_finite = g.a > 0.0;
  } else {
    throw std::invalid_argument("model config: unknown tempering type '" +
                                type + "'");
  }
  return g;
}

json tempering_to(const TemperingFn& g) {
  switch (g.kind) {
    case TemperingFn::Kind::Constant:
      return {{"type", "constant"}, {"c", g.c}};
    case TemperingFn::Kind::Exponential:
      return {{"type", "exponential"}, {"c", g.c}, {"a", g.a}};
    case TemperingFn::Kind::Custom:
      throw std::invalid_argument(
          "model config: custom tempering handles are not serializable");
  }
  return {};
}

LevyMeasureSpec levy_from(const json& j, int m) {
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "zero") return LevyMeasureSpec{LevyZero{}};
  if (variant == "coordinate_stable") {
    LevyCoordinateStable cs;
    cs.theta = vector_from(j.at("theta"), "levy.theta", m);
    cs.weight = vector_from(j.at("weight"), "levy.weight", m);
    return LevyMeasureSpec{cs};
  }
  if (variant == "spherical") {
    LevySpherical sp;
    sp.theta = j.at("theta").get<double>();
    if (j.contains("uniform_atoms")) {
      sp.atoms = uniform_sphere_atoms(m, j.at("uniform_atoms").get<int>(),
                                      j.value("total_mass", 1.0));
    } else {
      for (const auto& atom : j.at("atoms")) {
        sp.atoms.emplace_back(vector_from(atom.at("dir"), "levy.atom.dir", m),
                              atom.at("mass").get<double>());
      }
    }
    return LevyMeasureSpec{sp};
  }
  if (variant == "tempered_coordinate") {
    LevyTemperedCoordinate tc;
    tc.theta = vector_from(j.at("theta"), "levy.theta", m);
    for (const auto& gj : j.at("g")) tc.g.push_back(tempering_from(gj));
    if (tc.g.size() != static_cast<std::size_t>(m))
      throw std::invalid_argument("model config: levy.g has wrong length");
    return LevyMeasureSpec{tc};
  }
  if (variant == "truncated") {
    const double radius = j.at("radius").get<double>();
    return truncate_levy(levy_from(j.at("inner"), m), radius);
  }
  if (variant == "compound_poisson") {
    LevyCompoundPoisson cp;
    cp.rate = j.at("rate").get<double>();
    const auto& jj = j.at("jump");
    const std::string type = jj.at("type").get<std::string>();
    if (type == "dirac") {
      cp.jump.kind = JumpDist::Kind::Dirac;
      cp.jump.value = vector_from(jj.at("value"), "levy.jump.value", m);
    } else if (type == "exponential") {
      cp.jump.kind = JumpDist::Kind::Exponential;
      cp.jump.value = vector_from(jj.at("mean"), "levy.jump.mean", m);
    } else {
      throw std::invalid_argument("model config: unknown jump type '" + type +
                                  "'");
    }
    return LevyMeasureSpec{cp};
  }
  throw std::invalid_argument("model config: unknown levy variant '" + variant +
                              "'");
}

json levy_to(const LevyMeasureSpec& spec) {
  return std::visit(
      [](const auto& lv) -> json {
        using T = std::decay_t<decltype(lv)>;
        if constexpr (std::is_same_v<T, LevyZero>) {
          return {{"variant", "zero"}};
        } else if constexpr (std::is_same_v<T, LevyCoordinateStable>) {
          return {{"variant", "coordinate_stable"},
                  {"theta", std::vector<double>(lv.theta.begin(), lv.theta.end())},
                  {"weight",
                   std::vector<double>(lv.weight.begin(), lv.weight.end())}};
        } else if constexpr (std::is_same_v<T, LevySpherical>) {
          json atoms = json::array();
          for (const auto& [dir, mass] : lv.atoms)
            atoms.push_back(
                {{"dir", std::vector<double>(dir.begin(), dir.end())},
                 {"mass", mass}});
          return {{"variant", "spherical"}, {"theta", lv.theta}, {"atoms", atoms}};
        } else if constexpr (std::is_same_v<T, LevyTemperedCoordinate>) {
          json gs = json::array();
          for (const auto& g : lv.g) gs.push_back(tempering_to(g));
          return {{"variant", "tempered_coordinate"},
                  {"theta", std::vector<double>(lv.theta.begin(), lv.theta.end())},
                  {"g", gs}};
        } else if constexpr (std::is_same_v<T, LevyTruncated>) {
          return {{"variant", "truncated"},
                  {"radius", lv.radius},
                  {"inner", levy_to(*lv.inner)}};
        } else if constexpr (std::is_same_v<T, LevyCompoundPoisson>) {
          json jump;
          switch (lv.jump.kind) {
            case JumpDist::Kind::Dirac:
              jump = {{"type", "dirac"},
                      {"value", std::vector<double>(lv.jump.value.begin(),
                                                    lv.jump.value.end())}};
              break;
            case JumpDist::Kind::Exponential:
              jump = {{"type", "exponential"},
                      {"mean", std::vector<double>(lv.jump.value.begin(),
                                                   lv.jump.value.end())}};
              break;
            case JumpDist::Kind::Custom:
              throw std::invalid_argument(
                  "model config: custom jump samplers are not serializable");
          }
          return {{"variant", "compound_poisson"},
                  {"rate", lv.rate},
                  {"jump", jump}};
        }
      },
      spec.v);
}

}  // namespace

ModelParams model_from_json(const json& j) {
  ModelParams p;
  p.m = j.at("m").get<int>();
  p.b = vector_from(j.at("b"), "b", p.m);
  p.sigma = vector_from(j.at("sigma"), "sigma", p.m);
  p.alpha = vector_from(j.at("alpha"), "alpha", p.m);
  const auto& bj = j.at("beta");
  if (!bj.is_array() || bj.size() != static_cast<std::size_t>(p.m))
    throw std::invalid_argument("model config: beta must be an m x m array");
  p.beta = Eigen::MatrixXd(p.m, p.m);
  for (int r = 0; r < p.m; ++r) {
    const Eigen::VectorXd row = vector_from(bj[r], "beta row", p.m);
    p.beta.row(r) = row.transpose();
  }
  p.levy = j.contains("levy") ? levy_from(j.at("levy"), p.m)
                              : LevyMeasureSpec{LevyZero{}};
  return p;
}

json model_to_json(const ModelParams& p) {
  json beta = json::array();
  for (int r = 0; r < p.m; ++r) {
    json row = json::array();
    for (int c = 0; c < p.m; ++c) row.push_back(p.beta(r, c));
    beta.push_back(row);
  }
  return {{"m", p.m},
          {"b", std::vector<double>(p.b.begin(), p.b.end())},
          {"beta", beta},
          {"sigma", std::vector<double>(p.sigma.begin(), p.sigma.end())},
          {"alpha", std::vector<double>(p.alpha.begin(), p.alpha.end())},
          {"levy", levy_to(p.levy)}};
}

ModelParams load_model_file(const std::filesystem::path& path) {
  return model_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

CsvWriter::CsvWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path.string());
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += "\"\"";
    else quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

void CsvWriter::header(const std::vector<std::string>& names) { row(names); }

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << "\r\n";
}

std::string CsvWriter::field(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string CsvWriter::field(std::size_t v) { return std::to_string(v); }
std::string CsvWriter::field(int v) { return std::to_string(v); }

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_json_file: cannot open " + path.string());
  out << j.dump(2) << "\n";
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("read_json_file: cannot open " + path.string());
  json j;
  in >> j;
  return j;
}

// ---------------------------------------------------------------------------
// Density grid artifacts
// ---------------------------------------------------------------------------

void write_density_grid(const std::filesystem::path& csv_path,
                        const DensityGrid& grid, const json& extra) {
  CsvWriter csv(csv_path);
  std::vector<std::string> names;
  for (int k = 0; k < grid.dims(); ++k) names.push_back("y" + std::to_string(k));
  names.push_back("value");
  csv.header(names);

  std::vector<int> idx(grid.dims(), 0);
  for (std::size_t f = 0; f < grid.values.size(); ++f) {
    std::vector<std::string> fields;
    std::size_t rem = f;
    for (int k = grid.dims() - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(rem % grid.axes[k].count);
      rem /= grid.axes[k].count;
    }
    for (int k = 0; k < grid.dims(); ++k)
      fields.push_back(CsvWriter::field(grid.axes[k].at(idx[k])));
    fields.push_back(CsvWriter::field(grid.values[f]));
    csv.row(fields);
  }

  json header;
  json axes = json::array();
  for (const auto& ax : grid.axes)
    axes.push_back({{"origin", ax.origin}, {"step", ax.step}, {"count", ax.count}});
  header["kind"] = "density_grid";
  header["axes"] = axes;
  if (grid.weight_delta)
    header["weight"] = {{"rho_delta", *grid.weight_delta}};
  else
    header["weight"] = nullptr;
  header["clipped_mass"] = grid.clipped_mass;
  header["u_max"] = grid.u_max;
  header["du"] = grid.du;
  header["suspect"] = grid.suspect;
  for (auto it = extra.begin(); it != extra.end(); ++it) header[it.key()] = *it;
  std::filesystem::path jpath = csv_path;
  jpath.replace_extension(".json");
  write_json_file(jpath, header);
}

DensityGrid read_density_grid(const std::filesystem::path& csv_path) {
  std::filesystem::path jpath = csv_path;
  jpath.replace_extension(".json");
  const json header = read_json_file(jpath);
  DensityGrid grid;
  for (const auto& ax : header.at("axes"))
    grid.axes.push_back({ax.at("origin").get<double>(), ax.at("step").get<double>(),
                         ax.at("count").get<int>()});
  std::size_t total = 1;
  for (const auto& ax : grid.axes) total *= static_cast<std::size_t>(ax.count);
  grid.values.reserve(total);

  std::ifstream in(csv_path);
  if (!in)
    throw std::invalid_argument("read_density_grid: cannot open " +
                                csv_path.string());
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto pos = line.find_last_of(',');
    grid.values.push_back(std::stod(line.substr(pos + 1)));
  }
  if (grid.values.size() != total)
    throw std::runtime_error("read_density_grid: value count mismatch");
  if (!header.at("weight").is_null())
    grid.weight_delta = header.at("weight").at("rho_delta").get<double>();
  grid.clipped_mass = header.value("clipped_mass", 0.0);
  grid.u_max = header.value("u_max", 0.0);
  grid.du = header.value("du", 0.0);
  grid.suspect = header.value("suspect", false);
  return grid;
}

void write_terminal_binary(const std::filesystem::path& path,
                           const Eigen::MatrixXd& states) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("write_terminal_binary: cannot open " +
                             path.string());
  out << "ajcir-terminal " << states.rows() << " " << states.cols() << "\n";
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    for (Eigen::Index k = 0; k < states.cols(); ++k) {
      const double v = states(i, k);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  }
}

}  // namespace ajcir
