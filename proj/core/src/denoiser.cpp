#include "invdes/denoiser.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace invdes::diffusion {

using ad::Tensor;
using ad::Value;

Standardizer Standardizer::fit(const Tensor& rows) {
  const std::size_t n = rows.rows(), d = rows.cols();
  if (n == 0) throw std::invalid_argument("cannot fit standardizer on empty data");
  Standardizer st;
  st.mean.assign(d, 0.0);
  st.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) st.mean[c] += rows(i, c);
  }
  for (double& m : st.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = rows(i, c) - st.mean[c];
      st.scale[c] += dv * dv;
    }
  }
  for (double& s : st.scale) s = std::max(std::sqrt(s / static_cast<double>(n)), 1e-6);
  return st;
}

Standardizer Standardizer::identity(int dim) {
  Standardizer st;
  st.mean.assign(dim, 0.0);
  st.scale.assign(dim, 1.0);
  return st;
}

Tensor Standardizer::standardize(const Tensor& rows) const {
  Tensor out(rows.rows(), rows.cols());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    for (std::size_t c = 0; c < rows.cols(); ++c) {
      out(i, c) = (rows(i, c) - mean[c]) / scale[c];
    }
  }
  return out;
}

Tensor Standardizer::destandardize(const Tensor& rows) const {
  Tensor out(rows.rows(), rows.cols());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    for (std::size_t c = 0; c < rows.cols(); ++c) {
      out(i, c) = rows(i, c) * scale[c] + mean[c];
    }
  }
  return out;
}

std::vector<double> Standardizer::standardize(const std::vector<double>& v) const {
  std::vector<double> out(v.size());
  for (std::size_t c = 0; c < v.size(); ++c) out[c] = (v[c] - mean[c]) / scale[c];
  return out;
}

std::vector<double> Standardizer::destandardize(const std::vector<double>& v) const {
  std::vector<double> out(v.size());
  for (std::size_t c = 0; c < v.size(); ++c) out[c] = v[c] * scale[c] + mean[c];
  return out;
}

DenoiserWeights DenoiserWeights::init(const MlpArch& arch, const NoiseSchedule& sched,
                                      const Standardizer& st, RngStream& rng) {
  DenoiserWeights w;
  w.arch = arch;
  w.schedule = sched;
  w.standardizer = st;
  int in = arch.input_dim();
  std::vector<int> dims = arch.hidden;
  dims.push_back(arch.design_dim);
  for (int out : dims) {
    Tensor W(static_cast<std::size_t>(in), static_cast<std::size_t>(out));
    const double s = std::sqrt(2.0 / static_cast<double>(in));
    for (std::size_t k = 0; k < W.numel(); ++k) W[k] = rng.normal() * s;
    w.params.push_back(std::move(W));
    w.params.push_back(Tensor(1, static_cast<std::size_t>(out), 0.0));
    in = out;
  }
  return w;
}

std::vector<std::string> DenoiserWeights::param_names() const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l * 2 < params.size(); ++l) {
    names.push_back("layer" + std::to_string(l) + ".weight");
    names.push_back("layer" + std::to_string(l) + ".bias");
  }
  return names;
}

Tensor time_embedding(const Tensor& t, int features) {
  const int pairs = features / 2;
  Tensor out(t.rows(), static_cast<std::size_t>(features));
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (int p = 0; p < pairs; ++p) {
      const double freq =
          std::pow(1000.0, pairs > 1 ? static_cast<double>(p) / (pairs - 1) : 0.0);
      out(r, static_cast<std::size_t>(2 * p)) = std::sin(freq * t(r, 0));
      out(r, static_cast<std::size_t>(2 * p + 1)) = std::cos(freq * t(r, 0));
    }
  }
  return out;
}

namespace {

Tensor assemble_input(const DenoiserWeights& w, const Tensor& x, const Tensor& t,
                      const Tensor* cond) {
  if (static_cast<int>(x.cols()) != w.arch.design_dim) {
    throw std::invalid_argument("denoiser input has " + std::to_string(x.cols()) +
                                " columns, expected " + std::to_string(w.arch.design_dim));
  }
  Tensor in = ad::concat_cols(x, time_embedding(t, w.arch.time_features));
  if (w.arch.conditional) {
    Tensor c = cond ? *cond : Tensor(x.rows(), 3, 0.0);
    if (c.rows() != x.rows() || c.cols() != 3) {
      throw std::invalid_argument("conditioning rows must be (B,3)");
    }
    in = ad::concat_cols(in, c);
  } else if (cond) {
    throw std::invalid_argument("conditioning passed to an unconditional denoiser");
  }
  return in;
}

}  // namespace

Tensor denoiser_forward(const DenoiserWeights& w, const Tensor& x, const Tensor& t,
                        const Tensor* cond) {
  Tensor h = assemble_input(w, x, t, cond);
  for (std::size_t l = 0; l * 2 < w.params.size(); ++l) {
    h = ad::add(ad::matmul(h, w.params[2 * l]), w.params[2 * l + 1]);
    if (2 * l + 2 < w.params.size()) h = ad::silu(h);
  }
  return h;
}

Tensor denoiser_forward(const DenoiserWeights& w, const Tensor& x, double t,
                        const std::optional<ConditioningVector>& cond) {
  Tensor tv(x.rows(), 1, t);
  if (!cond) return denoiser_forward(w, x, tv, nullptr);
  Tensor c(x.rows(), 3);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    c(r, 0) = cond->goal_x;
    c(r, 1) = cond->goal_y;
    c(r, 2) = cond->percentile;
  }
  return denoiser_forward(w, x, tv, &c);
}

Value denoiser_forward_t(ad::Tape& tape, const DenoiserWeights& w,
                         std::span<const Value> params, Value x, const Tensor& t,
                         const Tensor* cond) {
  if (params.size() != w.params.size()) {
    throw std::invalid_argument("expected " + std::to_string(w.params.size()) +
                                " parameter values");
  }
  const Tensor& xv = tape.val(x);
  Value h = concat_cols(x, tape.constant(time_embedding(t, w.arch.time_features)));
  if (w.arch.conditional) {
    Tensor c = cond ? *cond : Tensor(xv.rows(), 3, 0.0);
    h = concat_cols(h, tape.constant(std::move(c)));
  }
  for (std::size_t l = 0; l * 2 < params.size(); ++l) {
    h = add(matmul(h, params[2 * l]), params[2 * l + 1]);
    if (2 * l + 2 < params.size()) h = silu(h);
  }
  return h;
}

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;
constexpr char kMagic[8] = {'I', 'D', 'C', 'K', 'P', 'T', '0', '\n'};

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_doubles(std::ostream& os, std::span<const double> xs) {
  for (double x : xs) put_u64(os, std::bit_cast<std::uint64_t>(x));
}

}  // namespace

void save_checkpoint(const std::string& path, const DenoiserWeights& w) {
  nlohmann::json header;
  header["version"] = kCheckpointVersion;
  header["design_dim"] = w.arch.design_dim;
  header["hidden"] = w.arch.hidden;
  header["conditional"] = w.arch.conditional;
  header["time_features"] = w.arch.time_features;
  header["beta_min"] = w.schedule.beta_min;
  header["beta_max"] = w.schedule.beta_max;
  header["mean"] = w.standardizer.mean;
  header["scale"] = w.standardizer.scale;
  std::vector<std::vector<std::uint64_t>> shapes;
  for (const Tensor& p : w.params) shapes.push_back({p.rows(), p.cols()});
  header["shapes"] = shapes;

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
  os.write(kMagic, sizeof(kMagic));
  const std::string htext = header.dump();
  put_u64(os, htext.size());
  os.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const Tensor& p : w.params) put_doubles(os, p.data());
  if (!os) throw std::runtime_error("short write while saving checkpoint: " + path);
}

DenoiserWeights load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != std::string(kMagic, 8)) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  const std::uint64_t hlen = get_u64(is);
  std::string htext(hlen, '\0');
  is.read(htext.data(), static_cast<std::streamsize>(hlen));
  nlohmann::json header = nlohmann::json::parse(htext);
  if (header.at("version").get<std::uint32_t>() != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version in " + path);
  }

  DenoiserWeights w;
  w.arch.design_dim = header.at("design_dim").get<int>();
  w.arch.hidden = header.at("hidden").get<std::vector<int>>();
  w.arch.conditional = header.at("conditional").get<bool>();
  w.arch.time_features = header.at("time_features").get<int>();
  w.schedule.beta_min = header.at("beta_min").get<double>();
  w.schedule.beta_max = header.at("beta_max").get<double>();
  w.standardizer.mean = header.at("mean").get<std::vector<double>>();
  w.standardizer.scale = header.at("scale").get<std::vector<double>>();

  for (const auto& sh : header.at("shapes")) {
    const std::size_t r = sh[0].get<std::size_t>(), c = sh[1].get<std::size_t>();
    Tensor p(r, c);
    for (std::size_t k = 0; k < p.numel(); ++k) {
      p[k] = std::bit_cast<double>(get_u64(is));
    }
    if (!is) throw std::runtime_error("truncated checkpoint: " + path);
    w.params.push_back(std::move(p));
  }
  return w;
}

}  // namespace invdes::diffusion
