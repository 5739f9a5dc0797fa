// Checkpoint file layout (native little-endian):
//   magic "PAOCKPT\x01" | payload | fnv1a64(payload)
// payload: layout version, config text, CMA-ES state (dense covariance and
// cached eigenbasis), sampling RNG cursor, best genome, log row count.

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "protoattn/errors.hpp"
#include "protoattn/harness.hpp"

namespace protoattn {

namespace {

constexpr char kMagic[8] = {'P', 'A', 'O', 'C', 'K', 'P', 'T', '\x01'};

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void pod(const T& v) {
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    buf_ += s;
  }
  void vec(const Eigen::VectorXd& v) {
    pod<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
    buf_.append(reinterpret_cast<const char*>(v.data()), sizeof(double) * v.size());
  }
  void mat(const Eigen::MatrixXd& m) {
    pod<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
    pod<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
    buf_.append(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : buf_(bytes) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Eigen::VectorXd vec() {
    const auto n = pod<std::uint64_t>();
    need(n * sizeof(double));
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    std::memcpy(v.data(), buf_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  Eigen::MatrixXd mat() {
    const auto r = pod<std::uint64_t>();
    const auto c = pod<std::uint64_t>();
    if (c != 0 && r > (buf_.size() - pos_) / sizeof(double) / c) throw MalformedInput("checkpoint: truncated matrix");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    need(r * c * sizeof(double));
    std::memcpy(m.data(), buf_.data() + pos_, r * c * sizeof(double));
    pos_ += r * c * sizeof(double);
    return m;
  }
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > buf_.size() - pos_) throw MalformedInput("checkpoint: truncated payload");
  }
  const std::string& buf_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const TrainerState& st, const std::string& path) {
  Writer w;
  w.str(std::string(kLayoutVersion));
  w.str(to_text(st.config));
  const auto& c = st.cma;
  for (std::int64_t v : {std::int64_t{c.dim}, std::int64_t{c.lambda}, std::int64_t{c.mu}, c.generation,
                         c.eigen_generation})
    w.pod(v);
  for (double v : {c.sigma, c.mu_eff, c.c_sigma, c.d_sigma, c.c_c, c.c_1, c.c_mu, c.chi_n}) w.pod(v);
  w.vec(c.mean);
  w.vec(c.path_c);
  w.vec(c.path_sigma);
  w.vec(c.weights);
  w.vec(c.eigen_sqrt);
  w.mat(c.cov);
  w.mat(c.eigen_basis);
  w.pod(st.rng.key());
  w.pod(st.rng.counter());
  w.pod(st.best_fitness);
  w.pod(st.best_generation);
  w.vec(Eigen::Map<const Eigen::VectorXd>(st.best_genome.data(), static_cast<Eigen::Index>(st.best_genome.size())));
  w.pod(st.log_rows);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
    out.write(kMagic, sizeof kMagic);
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    const std::uint64_t sum = fnv1a(w.bytes());
    out.write(reinterpret_cast<const char*>(&sum), sizeof sum);
    out.flush();
    if (!out) throw std::runtime_error("failed writing checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

TrainerState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedInput("cannot read checkpoint '" + path + "'");
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (all.size() < sizeof kMagic + sizeof(std::uint64_t) || std::memcmp(all.data(), kMagic, sizeof kMagic) != 0)
    throw MalformedInput("checkpoint '" + path + "': not a checkpoint file (bad magic); expected layout version " +
                         std::string(kLayoutVersion));
  const std::string payload = all.substr(sizeof kMagic, all.size() - sizeof kMagic - sizeof(std::uint64_t));
  std::uint64_t stored = 0;
  std::memcpy(&stored, all.data() + all.size() - sizeof stored, sizeof stored);
  if (stored != fnv1a(payload)) throw MalformedInput("checkpoint '" + path + "': checksum mismatch (corrupt file)");

  Reader r(payload);
  const std::string layout = r.str();
  if (layout != kLayoutVersion)
    throw MalformedInput("checkpoint '" + path + "': layout version mismatch: file has '" + layout + "', expected '" +
                         std::string(kLayoutVersion) + "'");
  TrainerState st;
  st.config = parse_run_config(r.str(), path + " (embedded config)");
  auto& c = st.cma;
  c.dim = static_cast<int>(r.pod<std::int64_t>());
  c.lambda = static_cast<int>(r.pod<std::int64_t>());
  c.mu = static_cast<int>(r.pod<std::int64_t>());
  c.generation = r.pod<std::int64_t>();
  c.eigen_generation = r.pod<std::int64_t>();
  for (double* v : {&c.sigma, &c.mu_eff, &c.c_sigma, &c.d_sigma, &c.c_c, &c.c_1, &c.c_mu, &c.chi_n}) *v = r.pod<double>();
  c.mean = r.vec();
  c.path_c = r.vec();
  c.path_sigma = r.vec();
  c.weights = r.vec();
  c.eigen_sqrt = r.vec();
  c.cov = r.mat();
  c.eigen_basis = r.mat();
  const auto key = r.pod<std::uint64_t>();
  const auto counter = r.pod<std::uint64_t>();
  st.rng = CounterRng(key, counter);
  st.best_fitness = r.pod<double>();
  st.best_generation = r.pod<std::int64_t>();
  const Eigen::VectorXd best = r.vec();
  st.best_genome.assign(best.data(), best.data() + best.size());
  st.log_rows = r.pod<std::int64_t>();
  if (!r.at_end()) throw MalformedInput("checkpoint '" + path + "': trailing bytes");

  if (static_cast<std::size_t>(c.dim) != count_params(st.config.model))
    throw MalformedInput("checkpoint '" + path + "': optimizer dimension does not match the model layout");
  return st;
}

}  // namespace protoattn
