#include "sigverify/model_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "sigverify/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts need byte swapping");

namespace sigverify {

namespace {

constexpr char kMagic[8] = {'S', 'G', 'V', 'M', 'O', 'D', 'L', '\0'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t crc_of(const std::string& payload) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
              static_cast<uInt>(payload.size())));
}

class Writer {
 public:
  template <typename T>
  void pod(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    buf_.append(s);
  }
  void vec(const Eigen::VectorXd& v) {
    if (!v.allFinite()) raise(ErrorCode::NonFinite, "refusing to save non-finite values");
    pod<std::int64_t>(v.size());
    buf_.append(reinterpret_cast<const char*>(v.data()), sizeof(double) * v.size());
  }
  void mat(const Eigen::MatrixXd& m) {
    if (!m.allFinite()) raise(ErrorCode::NonFinite, "refusing to save non-finite values");
    pod<std::int64_t>(m.rows());
    pod<std::int64_t>(m.cols());
    buf_.append(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
  }
  void doubles(const std::vector<double>& v) {
    pod<std::uint64_t>(v.size());
    buf_.append(reinterpret_cast<const char*>(v.data()), sizeof(double) * v.size());
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t size) : data_(data), size_(size) {}
  template <typename T>
  T pod() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    need(n);
    std::string s(data_ + pos_, n);
    pos_ += n;
    return s;
  }
  Eigen::VectorXd vec() {
    const auto n = pod<std::int64_t>();
    if (n < 0) raise(ErrorCode::CorruptFile, "negative vector length");
    need(sizeof(double) * n);
    Eigen::VectorXd v(n);
    std::memcpy(v.data(), data_ + pos_, sizeof(double) * n);
    pos_ += sizeof(double) * n;
    return v;
  }
  Eigen::MatrixXd mat() {
    const auto rows = pod<std::int64_t>();
    const auto cols = pod<std::int64_t>();
    if (rows < 0 || cols < 0) raise(ErrorCode::CorruptFile, "negative matrix extent");
    need(sizeof(double) * rows * cols);
    Eigen::MatrixXd m(rows, cols);
    std::memcpy(m.data(), data_ + pos_, sizeof(double) * m.size());
    pos_ += sizeof(double) * m.size();
    return m;
  }
  std::vector<double> doubles() {
    const auto n = pod<std::uint64_t>();
    need(sizeof(double) * n);
    std::vector<double> v(n);
    std::memcpy(v.data(), data_ + pos_, sizeof(double) * n);
    pos_ += sizeof(double) * n;
    return v;
  }
  bool exhausted() const { return pos_ == size_; }

 private:
  void need(std::uint64_t n) const {
    if (pos_ + n > size_) raise(ErrorCode::CorruptFile, "section payload truncated");
  }
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

void append_section(std::string& out, const char tag[4], const std::string& payload) {
  out.append(tag, 4);
  const std::uint64_t len = payload.size();
  out.append(reinterpret_cast<const char*>(&len), sizeof(len));
  out.append(payload);
  const std::uint32_t crc = crc_of(payload);
  out.append(reinterpret_cast<const char*>(&crc), sizeof(crc));
}

std::string whitening_payload(const WhiteningTransform& w) {
  Writer wr;
  wr.vec(w.mean);
  wr.mat(w.basis);
  wr.pod<double>(w.epsilon);
  wr.pod<std::int32_t>(w.retained_k);
  wr.pod<double>(w.variance_kept);
  wr.pod<std::uint8_t>(static_cast<std::uint8_t>(w.mode));
  return wr.bytes();
}

WhiteningTransform read_whitening(Reader& r) {
  WhiteningTransform w;
  w.mean = r.vec();
  w.basis = r.mat();
  w.epsilon = r.pod<double>();
  w.retained_k = r.pod<std::int32_t>();
  w.variance_kept = r.pod<double>();
  w.mode = static_cast<WhitenMode>(r.pod<std::uint8_t>());
  return w;
}

std::string encoder_payload(const FeatureBank& bank) {
  Writer wr;
  wr.mat(bank.params.W1);
  wr.vec(bank.params.b1);
  wr.mat(bank.params.W2);
  wr.vec(bank.params.b2);
  wr.pod<double>(bank.hyper.rho);
  wr.pod<double>(bank.hyper.beta);
  wr.pod<double>(bank.hyper.lambda);
  wr.pod<std::int32_t>(bank.hyper.iterations);
  wr.pod<std::int32_t>(bank.hyper.lbfgs_history);
  wr.pod<std::uint64_t>(bank.hyper.seed);
  wr.pod<std::uint8_t>(bank.hyper.squared_activation ? 1 : 0);
  wr.pod<std::int32_t>(bank.patch_h);
  wr.pod<std::int32_t>(bank.patch_w);
  wr.doubles(bank.training_cost_trace);
  return wr.bytes();
}

void read_encoder(Reader& r, FeatureBank& bank) {
  bank.params.W1 = r.mat();
  bank.params.b1 = r.vec();
  bank.params.W2 = r.mat();
  bank.params.b2 = r.vec();
  bank.hyper.rho = r.pod<double>();
  bank.hyper.beta = r.pod<double>();
  bank.hyper.lambda = r.pod<double>();
  bank.hyper.iterations = r.pod<std::int32_t>();
  bank.hyper.lbfgs_history = r.pod<std::int32_t>();
  bank.hyper.seed = r.pod<std::uint64_t>();
  bank.hyper.squared_activation = r.pod<std::uint8_t>() != 0;
  bank.patch_h = r.pod<std::int32_t>();
  bank.patch_w = r.pod<std::int32_t>();
  bank.training_cost_trace = r.doubles();
}

std::string users_payload(const std::vector<UserModel>& users) {
  Writer wr;
  wr.pod<std::uint64_t>(users.size());
  for (const auto& u : users) {
    wr.str(u.user_id);
    wr.vec(u.mean);
    wr.mat(u.covariance);
    wr.pod<double>(u.reg);
    wr.pod<std::uint8_t>(u.threshold.has_value() ? 1 : 0);
    wr.pod<double>(u.threshold.value_or(0.0));
    wr.pod<std::int32_t>(u.train_count);
  }
  return wr.bytes();
}

std::vector<UserModel> read_users(Reader& r) {
  const auto count = r.pod<std::uint64_t>();
  std::vector<UserModel> users;
  users.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    UserModel u;
    u.user_id = r.str();
    u.mean = r.vec();
    u.covariance = r.mat();
    u.reg = r.pod<double>();
    const bool has_threshold = r.pod<std::uint8_t>() != 0;
    const double threshold = r.pod<double>();
    if (has_threshold) u.threshold = threshold;
    u.train_count = r.pod<std::int32_t>();
    // The Cholesky factor is derived state; rebuild it from the stored matrix.
    u.factor.compute(u.covariance);
    if (u.factor.info() != Eigen::Success)
      raise(ErrorCode::CorruptFile, "stored covariance for user " + u.user_id +
                                        " is not positive definite");
    users.push_back(std::move(u));
  }
  return users;
}

}  // namespace

void save_model(const ModelFile& model, const std::string& path) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  const std::uint32_t version = kVersion;
  out.append(reinterpret_cast<const char*>(&version), sizeof(version));
  append_section(out, "CFG\0", model.config_text);
  append_section(out, "WHT\0", whitening_payload(model.bank.whitening));
  append_section(out, "AEP\0", encoder_payload(model.bank));
  append_section(out, "USR\0", users_payload(model.users));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) raise(ErrorCode::IoFailure, "short write to '" + path + "'");
}

ModelFile load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(ErrorCode::IoFailure, "cannot open '" + path + "'");
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  if (data.size() < sizeof(kMagic) + sizeof(std::uint32_t))
    raise(ErrorCode::CorruptFile, "file too short for header");
  if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
    raise(ErrorCode::CorruptFile, "bad magic; not a model file");
  std::uint32_t version;
  std::memcpy(&version, data.data() + sizeof(kMagic), sizeof(version));
  if (version != kVersion)
    raise(ErrorCode::VersionMismatch,
          "model format version " + std::to_string(version) + ", expected " +
              std::to_string(kVersion));

  ModelFile model;
  bool have_wht = false, have_aep = false;
  std::size_t pos = sizeof(kMagic) + sizeof(std::uint32_t);
  while (pos < data.size()) {
    if (pos + 4 + sizeof(std::uint64_t) > data.size())
      raise(ErrorCode::CorruptFile, "truncated section header");
    char tag[5] = {data[pos], data[pos + 1], data[pos + 2], data[pos + 3], '\0'};
    pos += 4;
    std::uint64_t len;
    std::memcpy(&len, data.data() + pos, sizeof(len));
    pos += sizeof(len);
    if (pos + len + sizeof(std::uint32_t) > data.size())
      raise(ErrorCode::CorruptFile, "truncated section payload");
    std::string payload = data.substr(pos, len);
    pos += len;
    std::uint32_t crc;
    std::memcpy(&crc, data.data() + pos, sizeof(crc));
    pos += sizeof(crc);
    if (crc != crc_of(payload))
      raise(ErrorCode::CorruptFile, std::string("checksum mismatch in section ") + tag);

    Reader r(payload.data(), payload.size());
    if (std::memcmp(tag, "CFG", 3) == 0) {
      model.config_text = payload;
    } else if (std::memcmp(tag, "WHT", 3) == 0) {
      model.bank.whitening = read_whitening(r);
      have_wht = true;
    } else if (std::memcmp(tag, "AEP", 3) == 0) {
      read_encoder(r, model.bank);
      have_aep = true;
    } else if (std::memcmp(tag, "USR", 3) == 0) {
      model.users = read_users(r);
    } else {
      raise(ErrorCode::CorruptFile, std::string("unknown section tag ") + tag);
    }
    if (std::memcmp(tag, "CFG", 3) != 0 && !r.exhausted())
      raise(ErrorCode::CorruptFile, std::string("trailing bytes in section ") + tag);
  }
  if (!have_wht || !have_aep)
    raise(ErrorCode::CorruptFile, "model file is missing required sections");
  return model;
}

}  // namespace sigverify
