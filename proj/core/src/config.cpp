#include "vxshape/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "vxshape/pgm.hpp"

namespace vxs {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Typed reader that records every key it understands so unknown keys can be
// rejected afterwards.
class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  bool has(const std::string& key) {
    known_.insert(key);
    return kv_.count(key) > 0;
  }

  std::string get_string(const std::string& key, const std::string& dflt) {
    known_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key, double dflt) {
    known_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    try {
      size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' has non-numeric value '" +
                        it->second + "'");
    }
  }

  int get_int(const std::string& key, int dflt) {
    const double v = get_double(key, dflt);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw ConfigError("config: key '" + key + "' must be an integer");
    return i;
  }

  unsigned get_unsigned(const std::string& key, unsigned dflt) {
    const int v = get_int(key, static_cast<int>(dflt));
    if (v < 0) throw ConfigError("config: key '" + key + "' must be >= 0");
    return static_cast<unsigned>(v);
  }

  std::vector<double> get_list(const std::string& key,
                               std::vector<double> dflt) {
    known_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' has non-numeric entry '" +
                          item + "'");
      }
    }
    if (out.empty())
      throw ConfigError("config: key '" + key + "' is an empty list");
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : kv_)
      if (!known_.count(key))
        throw ConfigError("config: unknown key '" + key + "'");
  }

 private:
  const KeyValues& kv_;
  std::set<std::string> known_;
};

}  // namespace

KeyValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " of '" + path + "' is not key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key at line " + std::to_string(lineno));
    kv[key] = value;
  }
  return kv;
}

void apply_override(KeyValues& kv, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("config: override '" + assignment +
                      "' is not key=value");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (key.empty())
    throw ConfigError("config: override with empty key");
  kv[key] = value;
}

RunConfig resolve_run_config(const KeyValues& kv) {
  Reader r(kv);
  RunConfig cfg;

  cfg.grid_n = r.get_int("grid.n", cfg.grid_n);
  if (cfg.grid_n < 8) throw ConfigError("config: grid.n must be >= 8");

  const std::string bc = r.get_string("bc", "dirichlet");
  if (bc == "dirichlet")
    cfg.bc = BoundaryCondition::dirichlet_zero;
  else if (bc == "natural")
    cfg.bc = BoundaryCondition::natural;
  else
    throw ConfigError("config: bc must be dirichlet or natural, got '" + bc +
                      "'");

  cfg.p1 = r.get_double("p1", cfg.p1);
  cfg.p2 = r.get_double("p2", cfg.p2);
  if (!(cfg.p1 > 1.0) || !(cfg.p2 > 1.0))
    throw ConfigError("config: exponents p1, p2 must exceed 1");

  cfg.solver.eps_reg = r.get_double("eps_reg", cfg.solver.eps_reg);
  cfg.solver.tol = r.get_double("tol", cfg.solver.tol);
  cfg.solver.max_iter = r.get_int("max_iter", cfg.solver.max_iter);
  cfg.solver.bc = cfg.bc;
  if (cfg.solver.eps_reg < 0.0) throw ConfigError("config: eps_reg < 0");
  if (!(cfg.solver.tol > 0.0)) throw ConfigError("config: tol must be > 0");
  if (cfg.solver.max_iter < 1) throw ConfigError("config: max_iter < 1");

  cfg.f_kind = r.get_string("f.kind", cfg.f_kind);
  cfg.f_value = r.get_double("f.value", cfg.f_value);
  cfg.f_path = r.get_string("f.path", cfg.f_path);
  if (cfg.f_kind != "zero" && cfg.f_kind != "sinpi" && cfg.f_kind != "const" &&
      cfg.f_kind != "image")
    throw ConfigError("config: f.kind must be zero|sinpi|const|image");
  if (cfg.f_kind == "image" && cfg.f_path.empty())
    throw ConfigError("config: f.kind=image requires f.path");

  cfg.partition_kind = r.get_string("partition.kind", cfg.partition_kind);
  cfg.partition_cx = r.get_double("partition.cx", cfg.partition_cx);
  cfg.partition_cy = r.get_double("partition.cy", cfg.partition_cy);
  cfg.partition_r = r.get_double("partition.r", cfg.partition_r);
  cfg.partition_split = r.get_double("partition.split", cfg.partition_split);
  cfg.partition_sigma = r.get_double("partition.sigma", cfg.partition_sigma);
  cfg.partition_beta = r.get_double("partition.beta", cfg.partition_beta);
  cfg.partition_path = r.get_string("partition.path", cfg.partition_path);
  if (cfg.partition_kind != "disk" && cfg.partition_kind != "halfplane" &&
      cfg.partition_kind != "image" && cfg.partition_kind != "all2")
    throw ConfigError("config: partition.kind must be disk|halfplane|image|all2");
  if (cfg.partition_kind == "image" && cfg.partition_path.empty())
    throw ConfigError("config: partition.kind=image requires partition.path");

  cfg.field_family = r.get_string("field.family", cfg.field_family);
  cfg.field_cx = r.get_double("field.cx", cfg.field_cx);
  cfg.field_cy = r.get_double("field.cy", cfg.field_cy);
  cfg.field_radius = r.get_double("field.radius", cfg.field_radius);
  cfg.field_amplitude = r.get_double("field.amplitude", cfg.field_amplitude);
  cfg.field_dirx = r.get_double("field.dir_x", cfg.field_dirx);
  cfg.field_diry = r.get_double("field.dir_y", cfg.field_diry);
  cfg.field_plateau = r.get_double("field.plateau", cfg.field_plateau);
  if (cfg.field_family != "zero" && cfg.field_family != "translation" &&
      cfg.field_family != "rotation" && cfg.field_family != "squeeze")
    throw ConfigError(
        "config: field.family must be zero|translation|rotation|squeeze");

  cfg.deltas = r.get_list("deltas", cfg.deltas);
  cfg.ts = r.get_list("ts", cfg.ts);

  cfg.restore.beta = r.get_double("restore.beta", cfg.restore.beta);
  cfg.restore.sigma = r.get_double("restore.sigma", cfg.restore.sigma);
  cfg.restore.k = r.get_double("restore.k", cfg.restore.k);
  cfg.restore.p1 = r.get_double("restore.p1", cfg.restore.p1);
  cfg.restore.p2 = r.get_double("restore.p2", cfg.restore.p2);
  cfg.restore.descent.dt = r.get_double("restore.dt", cfg.restore.descent.dt);
  cfg.restore.descent.basis_count =
      r.get_int("restore.m", cfg.restore.descent.basis_count);
  cfg.restore.descent.basis_radius =
      r.get_double("restore.radius", cfg.restore.descent.basis_radius);
  cfg.restore.descent.max_outer =
      r.get_int("restore.max_outer", cfg.restore.descent.max_outer);
  cfg.restore.descent.stop_threshold =
      r.get_double("restore.stop_threshold",
                   cfg.restore.descent.stop_threshold);
  cfg.restore.descent.dt_min =
      r.get_double("restore.dt_min", cfg.restore.descent.dt_min);
  cfg.restore.solver.eps_reg =
      r.get_double("restore.eps_reg", cfg.restore.solver.eps_reg);
  cfg.restore.solver.tol = r.get_double("restore.tol", cfg.restore.solver.tol);
  cfg.restore.solver.max_iter =
      r.get_int("restore.max_iter", cfg.restore.solver.max_iter);

  cfg.input_path = r.get_string("input", cfg.input_path);
  cfg.seed = r.get_unsigned("seed", cfg.seed);

  r.reject_unknown();
  return cfg;
}

Grid make_grid(const RunConfig& cfg) { return Grid(cfg.grid_n); }

Forcing make_forcing(const RunConfig& cfg, const Grid& grid) {
  if (cfg.f_kind == "zero") return Forcing::zero(grid, cfg.bc);
  if (cfg.f_kind == "sinpi") return Forcing::sine_product(grid, cfg.bc);
  if (cfg.f_kind == "const")
    return Forcing::constant(grid, cfg.bc, cfg.f_value);
  return Forcing::from_grid(load_pgm(cfg.f_path, cfg.bc));
}

RegionPartition make_partition(const RunConfig& cfg, const Grid& grid) {
  if (cfg.partition_kind == "disk")
    return RegionPartition::disk(grid, {cfg.partition_cx, cfg.partition_cy},
                                 cfg.partition_r);
  if (cfg.partition_kind == "halfplane")
    return RegionPartition::half_plane_x(grid, cfg.partition_split);
  if (cfg.partition_kind == "all2") return RegionPartition(grid, 2);
  const GridFunction image = load_pgm(cfg.partition_path);
  if (image.grid() != grid)
    throw ConfigError("config: partition image size does not match grid.n");
  return build_partition(image, cfg.partition_sigma, cfg.partition_beta);
}

FieldPtr make_field(const RunConfig& cfg) {
  if (cfg.field_family == "zero") return make_zero_field();
  const Vec2 c{cfg.field_cx, cfg.field_cy};
  if (cfg.field_family == "translation")
    return make_translation_field(c, cfg.field_radius,
                                  {cfg.field_dirx, cfg.field_diry},
                                  cfg.field_amplitude, cfg.field_plateau);
  if (cfg.field_family == "rotation")
    return make_rotation_field(c, cfg.field_radius, cfg.field_amplitude,
                               cfg.field_plateau);
  return make_radial_field(c, cfg.field_radius, cfg.field_amplitude,
                           cfg.field_plateau);
}

std::vector<double> effective_deltas(const RunConfig& cfg, const Grid& grid) {
  if (!cfg.deltas.empty()) return cfg.deltas;
  return {6.0 * grid.h, 4.0 * grid.h, 2.0 * grid.h};
}

std::string describe_config(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "grid.n=" << cfg.grid_n << "\n"
     << "bc=" << (cfg.bc == BoundaryCondition::dirichlet_zero ? "dirichlet"
                                                              : "natural")
     << "\n"
     << "p1=" << cfg.p1 << "\np2=" << cfg.p2 << "\n"
     << "eps_reg=" << cfg.solver.eps_reg << "\ntol=" << cfg.solver.tol << "\n"
     << "max_iter=" << cfg.solver.max_iter << "\n"
     << "f.kind=" << cfg.f_kind << "\n";
  if (cfg.f_kind == "const") os << "f.value=" << cfg.f_value << "\n";
  if (cfg.f_kind == "image") os << "f.path=" << cfg.f_path << "\n";
  os << "partition.kind=" << cfg.partition_kind << "\n";
  if (cfg.partition_kind == "disk")
    os << "partition.cx=" << cfg.partition_cx
       << "\npartition.cy=" << cfg.partition_cy
       << "\npartition.r=" << cfg.partition_r << "\n";
  if (cfg.partition_kind == "halfplane")
    os << "partition.split=" << cfg.partition_split << "\n";
  if (cfg.partition_kind == "image")
    os << "partition.path=" << cfg.partition_path
       << "\npartition.sigma=" << cfg.partition_sigma
       << "\npartition.beta=" << cfg.partition_beta << "\n";
  os << "field.family=" << cfg.field_family << "\n";
  if (cfg.field_family != "zero") {
    os << "field.cx=" << cfg.field_cx << "\nfield.cy=" << cfg.field_cy
       << "\nfield.radius=" << cfg.field_radius
       << "\nfield.amplitude=" << cfg.field_amplitude
       << "\nfield.plateau=" << cfg.field_plateau << "\n";
    if (cfg.field_family == "translation")
      os << "field.dir_x=" << cfg.field_dirx
         << "\nfield.dir_y=" << cfg.field_diry << "\n";
  }
  os << "ts=";
  for (size_t k = 0; k < cfg.ts.size(); ++k)
    os << (k ? "," : "") << cfg.ts[k];
  os << "\ndeltas=";
  if (cfg.deltas.empty())
    os << "(default 6h,4h,2h)";
  else
    for (size_t k = 0; k < cfg.deltas.size(); ++k)
      os << (k ? "," : "") << cfg.deltas[k];
  os << "\nseed=" << cfg.seed << "\n";
  return os.str();
}

}  // namespace vxs
