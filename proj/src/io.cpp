#include "fwl/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fwl::io {

namespace {

std::string hex(const unsigned char* d, unsigned n) {
  std::ostringstream s;
  for (unsigned i = 0; i < n; ++i) s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(d[i]);
  return s.str();
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;
  void update(const char* p, std::size_t n) { EVP_DigestUpdate(ctx_, p, n); }
  std::string done() {
    unsigned char d[EVP_MAX_MD_SIZE];
    unsigned n = 0;
    EVP_DigestFinal_ex(ctx_, d, &n);
    return hex(d, n);
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, mode);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << std::setprecision(17);
  return f;
}

std::ifstream open_in(const fs::path& p, std::ios::openmode mode = std::ios::in) {
  if (!fs::exists(p)) throw MissingArtifact(p);
  std::ifstream f(p, mode);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  return f;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Header plus rows of a CSV file, cells as strings.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw FormatError("CSV has no column '" + name + "'");
  }
};

Table read_table(const fs::path& p) {
  auto f = open_in(p);
  Table t;
  std::string line;
  if (!std::getline(f, line)) throw FormatError(p.string() + ": empty file");
  t.header = split(line);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto r = split(line);
    if (r.size() != t.header.size()) throw FormatError(p.string() + ": row width differs from header");
    t.rows.push_back(std::move(r));
  }
  return t;
}

double num(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw FormatError("not a number: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("not a number: '" + s + "'");
  }
}

template <typename T>
void put(std::ostream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw FormatError("truncated binary file");
  return v;
}

void put_complex(std::ostream& f, const cplx* data, std::size_t n) {
  f.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(cplx)));
}

void get_complex(std::istream& f, cplx* data, std::size_t n) {
  f.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(cplx)));
  if (!f) throw FormatError("truncated binary file");
}

ModelParams model_from_json(const json& j) {
  ModelParams p;
  p.lambda = j.at("lambda").get<double>();
  p.omega = j.at("omega").get<double>();
  p.hbar = j.value("hbar", 1.0);
  return p;
}

}  // namespace

std::string sha256_file(const fs::path& p) {
  auto f = open_in(p, std::ios::binary);
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (f) {
    f.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(f.gcount()));
  }
  return h.done();
}

std::string sha256_string(const std::string& s) {
  Sha256 h;
  h.update(s.data(), s.size());
  return h.done();
}

void write_json(const fs::path& p, const json& j) {
  auto f = open_out(p);
  f << j.dump(2) << '\n';
}

json read_json(const fs::path& p) {
  auto f = open_in(p);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

fs::path sidecar(const fs::path& csv) {
  fs::path j = csv;
  j.replace_extension(".json");
  return j;
}

json to_json(const ModelParams& p) { return {{"lambda", p.lambda}, {"omega", p.omega}, {"hbar", p.hbar}}; }

json to_json(const SurvivalConfig& c) {
  return {{"scaled_energy", c.scaled_energy}, {"tau0", c.tau0},       {"stretch", c.stretch},
          {"r_escape", c.r_escape},           {"margin", c.margin},   {"n_samples", c.n_samples},
          {"seed", c.seed},                   {"exclude_regular", c.exclude_regular}};
}

json to_json(const SosFrame& f) {
  return {{"y_lo", f.y_lo}, {"y_hi", f.y_hi}, {"py_lo", f.py_lo}, {"py_hi", f.py_hi}};
}

json to_json(const BasisSpec& b) { return {{"n_max", b.n_max}, {"hbar", b.hbar}, {"size", b.size()}}; }

json to_json(const CountingBoxes& b) {
  return {{"center", b.center},
          {"width", b.width},
          {"gamma_cap_factor", b.gamma_cap_factor},
          {"n_boxes", b.n_boxes},
          {"offsets", b.placement()},
          {"absolute_gamma", b.absolute_gamma}};
}

json to_json(const HusimiConfig& c) {
  return {{"E0", c.E0},       {"n_each_side", c.n_each_side}, {"gamma_cut", c.gamma_cut},
          {"grid", c.grid},   {"theta", c.theta},             {"kernel", to_string(c.kernel)},
          {"rotation", to_string(c.rotation)}};
}

void write_repeller(const fs::path& csv, const RepellerSet& set, const ModelParams& p) {
  {
    auto f = open_out(csv);
    f << "y,py,t_cross,branch\n";
    for (const auto& q : set.points) f << q.y << ',' << q.py << ',' << q.t_cross << ',' << to_string(q.branch) << '\n';
  }
  write_json(sidecar(csv), {{"model", to_json(p)},
                            {"survival", to_json(set.provenance)},
                            {"energy", set.energy},
                            {"frame", to_json(set.frame)},
                            {"points", set.points.size()},
                            {"forward_survivors", set.forward_survivors},
                            {"backward_survivors", set.backward_survivors},
                            {"regular_excluded", set.regular_excluded},
                            {"trimmed", set.trimmed}});
}

RepellerSet read_repeller(const fs::path& csv) {
  const Table t = read_table(csv);
  const json meta = read_json(sidecar(csv));
  RepellerSet set;
  const std::size_t cy = t.column("y"), cpy = t.column("py"), ct = t.column("t_cross"), cb = t.column("branch");
  for (const auto& r : t.rows) set.points.push_back({num(r[cy]), num(r[cpy]), num(r[ct]), branch_from_string(r[cb])});
  set.energy = meta.at("energy").get<double>();
  const json& fr = meta.at("frame");
  set.frame = {fr.at("y_lo").get<double>(), fr.at("y_hi").get<double>(), fr.at("py_lo").get<double>(),
               fr.at("py_hi").get<double>()};
  const json& s = meta.at("survival");
  set.provenance.scaled_energy = s.at("scaled_energy").get<double>();
  set.provenance.tau0 = s.at("tau0").get<double>();
  set.provenance.stretch = s.at("stretch").get<double>();
  set.provenance.r_escape = s.at("r_escape").get<double>();
  set.provenance.margin = s.value("margin", 0.0);
  set.provenance.n_samples = s.at("n_samples").get<std::size_t>();
  set.provenance.seed = s.at("seed").get<std::uint64_t>();
  set.forward_survivors = meta.value("forward_survivors", std::size_t{0});
  set.backward_survivors = meta.value("backward_survivors", std::size_t{0});
  set.regular_excluded = meta.value("regular_excluded", std::size_t{0});
  set.trimmed = meta.value("trimmed", std::size_t{0});
  return set;
}

Eigen::MatrixXd read_points(const fs::path& csv) {
  const Table t = read_table(csv);
  std::vector<std::size_t> cols;
  const auto has = [&](const std::string& n) {
    return std::find(t.header.begin(), t.header.end(), n) != t.header.end();
  };
  if (has("y") && has("py")) {
    cols = {t.column("y"), t.column("py")};
  } else {
    for (std::size_t i = 0; i < t.header.size(); ++i) cols.push_back(i);
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = num(t.rows[r][cols[c]]);
  return out;
}

void write_points(const fs::path& csv, const Eigen::MatrixXd& pts, const std::vector<std::string>& names) {
  if (names.size() != static_cast<std::size_t>(pts.cols())) throw std::invalid_argument("one name per column");
  auto f = open_out(csv);
  for (std::size_t i = 0; i < names.size(); ++i) f << (i ? "," : "") << names[i];
  f << '\n';
  for (Eigen::Index r = 0; r < pts.rows(); ++r) {
    for (Eigen::Index c = 0; c < pts.cols(); ++c) f << (c ? "," : "") << pts(r, c);
    f << '\n';
  }
}

void write_correlation(const fs::path& csv, const CorrelationCurve& c, const json& extra) {
  {
    auto f = open_out(csv);
    f << "s,C2\n";
    for (std::size_t i = 0; i < c.scales.size(); ++i) f << c.scales[i] << ',' << c.values[i] << '\n';
  }
  json j = {{"d2", c.d2},           {"d2_err", c.d2_err},         {"fit_lo", c.fit_lo},
            {"fit_hi", c.fit_hi},   {"pairs_used", c.pairs_used}, {"subsampled", c.subsampled}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  write_json(sidecar(csv), j);
}

void write_catalog(const fs::path& csv, const SpectrumCatalog& cat) {
  const double es = saddle_energy(cat.params);
  {
    auto f = open_out(csv);
    f << "E_r_scaled,Gamma_scaled,theta_stability,hbar,symmetry\n";
    for (const auto& r : cat.resonances)
      f << r.energy / es << ',' << r.width / es << ',' << r.theta_stability << ',' << r.hbar << ',' << r.symmetry
        << '\n';
  }
  write_json(sidecar(csv), {{"model", to_json(cat.params)},
                            {"basis", to_json(cat.basis)},
                            {"theta_grid", cat.theta_grid},
                            {"reference_theta", cat.reference_theta},
                            {"solver", cat.solver},
                            {"tolerance", cat.tolerance},
                            {"saddle_energy", es},
                            {"resonances", cat.resonances.size()},
                            {"ambiguous", cat.ambiguous},
                            {"positive_imaginary", cat.positive_imaginary}});
}

SpectrumCatalog read_catalog(const fs::path& csv) {
  const Table t = read_table(csv);
  const json meta = read_json(sidecar(csv));
  SpectrumCatalog cat;
  cat.params = model_from_json(meta.at("model"));
  cat.basis.n_max = meta.at("basis").at("n_max").get<int>();
  cat.basis.hbar = meta.at("basis").at("hbar").get<double>();
  cat.theta_grid = meta.at("theta_grid").get<std::vector<double>>();
  cat.reference_theta = meta.at("reference_theta").get<double>();
  cat.solver = meta.at("solver").get<std::string>();
  cat.tolerance = meta.at("tolerance").get<double>();
  cat.ambiguous = meta.value("ambiguous", std::size_t{0});
  cat.positive_imaginary = meta.value("positive_imaginary", std::size_t{0});
  const double es = saddle_energy(cat.params);
  const std::size_t ce = t.column("E_r_scaled"), cg = t.column("Gamma_scaled"), cs = t.column("theta_stability"),
                    ch = t.column("hbar"), cc = t.column("symmetry");
  for (const auto& r : t.rows) {
    Resonance res;
    res.energy = num(r[ce]) * es;
    res.width = num(r[cg]) * es;
    res.theta_stability = num(r[cs]);
    res.hbar = num(r[ch]);
    res.symmetry = static_cast<int>(num(r[cc]));
    cat.resonances.push_back(res);
  }
  return cat;
}

namespace {
constexpr char kSpectrumMagic[8] = {'F', 'W', 'L', 'S', 'P', 'C', '0', '1'};
constexpr char kVectorMagic[8] = {'F', 'W', 'L', 'E', 'I', 'G', '0', '1'};

void check_magic(std::istream& f, const char (&magic)[8], const fs::path& p) {
  char m[8];
  f.read(m, 8);
  if (!f || std::memcmp(m, magic, 8) != 0) throw FormatError(p.string() + ": bad magic");
}
}  // namespace

void write_spectrum(const fs::path& p, const ThetaSpectrum& s) {
  auto f = open_out(p, std::ios::binary);
  f.write(kSpectrumMagic, 8);
  put<std::int64_t>(f, s.values.size());
  put<double>(f, s.theta);
  put<std::int32_t>(f, s.symmetry.empty() ? 0 : 1);
  put_complex(f, s.values.data(), static_cast<std::size_t>(s.values.size()));
  for (const int c : s.symmetry) put<std::int32_t>(f, c);
}

ThetaSpectrum read_spectrum(const fs::path& p) {
  auto f = open_in(p, std::ios::binary);
  check_magic(f, kSpectrumMagic, p);
  ThetaSpectrum s;
  const auto n = get<std::int64_t>(f);
  s.theta = get<double>(f);
  const bool sym = get<std::int32_t>(f) != 0;
  s.values.resize(n);
  get_complex(f, s.values.data(), static_cast<std::size_t>(n));
  if (sym)
    for (std::int64_t i = 0; i < n; ++i) s.symmetry.push_back(get<std::int32_t>(f));
  return s;
}

void write_eigenvectors(const fs::path& p, const EigenSystem& sys, const BasisSpec& basis, double theta) {
  const Eigen::Index rows = sys.right.rows(), cols = sys.values.size();
  if (sys.right.cols() != cols) throw std::invalid_argument("eigenvector file: right vectors do not match values");
  const bool left = sys.left.size() > 0;
  if (left && (sys.left.rows() != rows || sys.left.cols() != cols))
    throw std::invalid_argument("eigenvector file: left vectors do not match right vectors");
  auto f = open_out(p, std::ios::binary);
  f.write(kVectorMagic, 8);
  put<std::int64_t>(f, rows);
  put<std::int64_t>(f, cols);
  put<std::int32_t>(f, basis.n_max);
  put<std::int32_t>(f, left ? 1 : 0);
  put<double>(f, basis.hbar);
  put<double>(f, theta);
  put_complex(f, sys.values.data(), static_cast<std::size_t>(cols));
  put_complex(f, sys.right.data(), static_cast<std::size_t>(rows * cols));
  if (left) put_complex(f, sys.left.data(), static_cast<std::size_t>(rows * cols));
}

EigenvectorFile read_eigenvectors(const fs::path& p) {
  auto f = open_in(p, std::ios::binary);
  check_magic(f, kVectorMagic, p);
  EigenvectorFile out;
  const auto rows = get<std::int64_t>(f);
  const auto cols = get<std::int64_t>(f);
  out.basis.n_max = get<std::int32_t>(f);
  const bool left = (get<std::int32_t>(f) & 1) != 0;
  out.basis.hbar = get<double>(f);
  out.theta = get<double>(f);
  if (out.basis.size() != rows) throw FormatError(p.string() + ": row count does not match n_max");
  out.system.values.resize(cols);
  out.system.right.resize(rows, cols);
  get_complex(f, out.system.values.data(), static_cast<std::size_t>(cols));
  get_complex(f, out.system.right.data(), static_cast<std::size_t>(rows * cols));
  if (left) {
    out.system.left.resize(rows, cols);
    get_complex(f, out.system.left.data(), static_cast<std::size_t>(rows * cols));
  }
  return out;
}

void write_weyl(const fs::path& csv, const std::vector<WeylRow>& rows, const WeylFit& fit, const json& extra) {
  {
    auto f = open_out(csv);
    f << "hbar,n_max,N_mean";
    const std::size_t nb = rows.empty() ? 0 : rows.front().count.per_box.size();
    for (std::size_t b = 0; b < nb; ++b) f << ",box" << b;
    f << '\n';
    for (const auto& r : rows) {
      f << r.hbar << ',' << r.n_max << ',' << r.count.mean;
      for (const auto c : r.count.per_box) f << ',' << c;
      f << '\n';
    }
  }
  json j = {{"d", fit.d}, {"d_err", fit.d_err}, {"intercept", fit.intercept}, {"hbars", fit.hbars},
            {"counts", fit.counts}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  write_json(sidecar(csv), j);
}

void write_husimi(const fs::path& csv, const HusimiGrid& g, const json& extra) {
  {
    auto f = open_out(csv);
    f << "y,py,u,v,value,masked\n";
    for (int i = 0; i < g.n; ++i)
      for (int k = 0; k < g.n; ++k) {
        const Eigen::Vector2d uv = g.unit_center(i, k);
        const Eigen::Vector2d q = g.frame.from_unit(uv[0], uv[1]);
        const std::size_t idx = g.index(i, k);
        f << q[0] << ',' << q[1] << ',' << uv[0] << ',' << uv[1] << ',' << g.values[static_cast<Eigen::Index>(idx)]
          << ',' << static_cast<int>(g.masked[idx]) << '\n';
      }
  }
  json j = {{"config", to_json(g.config)}, {"energy", g.energy},       {"frame", to_json(g.frame)},
            {"grid", g.n},                 {"states_used", g.states_used}, {"gamma_cut", g.gamma_cut}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  write_json(sidecar(csv), j);
}

json artifact_entry(const fs::path& root, const fs::path& file) {
  return {{"path", fs::relative(file, root).generic_string()},
          {"bytes", fs::file_size(file)},
          {"sha256", sha256_file(file)}};
}

std::vector<std::string> verify_manifest(const fs::path& manifest) {
  const json m = read_json(manifest);
  const fs::path root = manifest.parent_path();
  std::vector<std::string> bad;
  for (const auto& a : m.at("artifacts")) {
    const fs::path p = root / a.at("path").get<std::string>();
    if (!fs::exists(p) || sha256_file(p) != a.at("sha256").get<std::string>())
      bad.push_back(a.at("path").get<std::string>());
  }
  return bad;
}

}  // namespace fwl::io
