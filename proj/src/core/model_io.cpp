#include "core/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "core/errors.hpp"

namespace spikebench::modelio {

namespace {

constexpr std::uint32_t kMagic = 0x4d4e4253;  // "SBNM" little-endian
constexpr std::uint32_t kFormatVersion = 1;

// Explicit little-endian encoding so the artifact is portable regardless of
// host byte order.
struct Writer {
  std::vector<std::uint8_t> bytes;

  void u8(std::uint8_t x) { bytes.push_back(x); }
  void u32(std::uint32_t x) {
    for (int i = 0; i < 4; ++i) bytes.push_back(std::uint8_t(x >> (8 * i)));
  }
  void u64(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) bytes.push_back(std::uint8_t(x >> (8 * i)));
  }
  void f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }
};

struct Reader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
  std::string path;

  void need(std::size_t n) const {
    if (pos + n > bytes.size()) throw DataError(path + ": model file truncated");
  }
  std::uint8_t u8() {
    need(1);
    return bytes[pos++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= std::uint32_t(bytes[pos + i]) << (8 * i);
    pos += 4;
    return x;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= std::uint64_t(bytes[pos + i]) << (8 * i);
    pos += 8;
    return x;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

void write_lif(Writer& w, const snn::LifParams& p) {
  w.f64(p.tau_rc_ms);
  w.f64(p.resistance);
  w.f64(p.v_rest_mv);
  w.f64(p.v_reset_mv);
  w.f64(p.v_thresh_base_mv);
  w.f64(p.tau_refrac_ms);
  w.f64(p.dt_ms);
  w.f64(p.tau_trace_ms);
  w.f64(p.theta_plus_mv);
  w.f64(p.tau_theta_ms);
}

snn::LifParams read_lif(Reader& r) {
  snn::LifParams p;
  p.tau_rc_ms = r.f64();
  p.resistance = r.f64();
  p.v_rest_mv = r.f64();
  p.v_reset_mv = r.f64();
  p.v_thresh_base_mv = r.f64();
  p.tau_refrac_ms = r.f64();
  p.dt_ms = r.f64();
  p.tau_trace_ms = r.f64();
  p.theta_plus_mv = r.f64();
  p.tau_theta_ms = r.f64();
  return p;
}

void write_synapses(Writer& w, const snn::SynapseMatrix& s) {
  w.u32(static_cast<std::uint32_t>(s.weights.rows));
  w.u32(static_cast<std::uint32_t>(s.weights.cols));
  w.f64(s.w_min);
  w.f64(s.w_max);
  w.u8(s.plastic ? 1 : 0);
  for (double x : s.weights.v) w.f64(x);
}

snn::SynapseMatrix read_synapses(Reader& r) {
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  // Guard before allocating: a corrupt size field must not OOM the process.
  if (std::uint64_t(rows) * cols > (std::uint64_t(1) << 28))
    throw DataError(r.path + ": synapse matrix implausibly large");
  snn::SynapseMatrix s;
  s.w_min = r.f64();
  s.w_max = r.f64();
  s.plastic = r.u8() != 0;
  s.weights = Mat(rows, cols);
  for (auto& x : s.weights.v) x = r.f64();
  return s;
}

}  // namespace

std::size_t ModelArtifact::resident_bytes() const {
  const auto& m = model;
  std::size_t doubles = m.syn_input_exc.weights.v.size() + m.syn_exc_inh.weights.v.size() +
                        m.syn_inh_exc.weights.v.size() + 4 * m.exc_state.size() +
                        4 * m.inh_state.size();
  return doubles * sizeof(double) + m.neuron_labels.size() * sizeof(std::int16_t);
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void save_model(ModelArtifact& artifact, const std::string& path) {
  const snn::NetworkModel& m = artifact.model;
  m.validate();

  Writer w;
  w.u32(kMagic);
  w.u32(kFormatVersion);
  w.u32(m.input_size);
  w.u32(m.n_exc);
  write_lif(w, m.exc_params);
  write_lif(w, m.inh_params);
  w.f64(m.stdp.eta_pre);
  w.f64(m.stdp.eta_post);
  w.f64(m.exc_inh_weight);
  w.f64(m.normalize_target);
  w.f64(m.inhibition.initial_magnitude);
  w.f64(m.inhibition.max_magnitude);
  w.u32(m.inhibition.update_interval);
  w.f64(m.inhibition.increment_per_update);

  write_synapses(w, m.syn_input_exc);
  write_synapses(w, m.syn_exc_inh);
  write_synapses(w, m.syn_inh_exc);

  // Adaptive thresholds are learned state and ship with the weights.
  for (double t : m.exc_state.theta) w.f64(t);

  w.u8(m.labels_assigned() ? 1 : 0);
  if (m.labels_assigned())
    for (auto l : m.neuron_labels) w.u8(static_cast<std::uint8_t>(l));

  w.f64(artifact.window_ms);
  w.f64(artifact.intensity_hz);
  w.u64(artifact.train_seed);
  w.u64(artifact.trained_samples);

  const std::uint64_t checksum = fnv1a64(w.bytes);
  w.u64(checksum);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out.write(reinterpret_cast<const char*>(w.bytes.data()),
            static_cast<std::streamsize>(w.bytes.size()));
  if (!out) throw IoError("write failed on " + path);

  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(checksum));
  artifact.version = hex;
}

ModelArtifact load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on " + path);

  if (bytes.size() < 8 + 8) throw FormatError(path + ": too short to be a model file");

  // Verify the checksum before trusting any field.
  const std::size_t payload = bytes.size() - 8;
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= std::uint64_t(bytes[payload + i]) << (8 * i);
  const std::uint64_t computed = fnv1a64({bytes.data(), payload});
  if (stored != computed) throw CorruptError(path + ": checksum mismatch");

  Reader r{{bytes.data(), payload}, 0, path};
  if (r.u32() != kMagic) throw FormatError(path + ": not a model file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion)
    throw VersionError(path + ": model format version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kFormatVersion) + ")");

  ModelArtifact art;
  snn::NetworkModel& m = art.model;
  m.input_size = r.u32();
  m.n_exc = r.u32();
  m.exc_params = read_lif(r);
  m.inh_params = read_lif(r);
  m.stdp.eta_pre = r.f64();
  m.stdp.eta_post = r.f64();
  m.exc_inh_weight = r.f64();
  m.normalize_target = r.f64();
  m.inhibition.initial_magnitude = r.f64();
  m.inhibition.max_magnitude = r.f64();
  m.inhibition.update_interval = r.u32();
  m.inhibition.increment_per_update = r.f64();

  m.syn_input_exc = read_synapses(r);
  m.syn_exc_inh = read_synapses(r);
  m.syn_inh_exc = read_synapses(r);

  m.exc_state = snn::NeuronState(m.n_exc, m.exc_params.v_rest_mv);
  m.inh_state = snn::NeuronState(m.n_exc, m.inh_params.v_rest_mv);
  for (auto& t : m.exc_state.theta) t = r.f64();

  if (r.u8()) {
    m.neuron_labels.resize(m.n_exc);
    for (auto& l : m.neuron_labels) l = static_cast<std::int16_t>(r.u8());
  }

  art.window_ms = r.f64();
  art.intensity_hz = r.f64();
  art.train_seed = r.u64();
  art.trained_samples = r.u64();

  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(stored));
  art.version = hex;

  m.validate();
  return art;
}

}  // namespace spikebench::modelio
