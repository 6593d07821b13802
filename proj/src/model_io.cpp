#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "daemb/encoders.hpp"

namespace daemb {

namespace {

constexpr char kMagic[] = "DAEMB1";

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_matrix(std::ostream& out, const Matrix& m) {
  write_u64(out, static_cast<std::uint64_t>(m.rows()));
  write_u64(out, static_cast<std::uint64_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void write_vector(std::ostream& out, const Vector& v) {
  write_u64(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

double read_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

std::string read_string(std::istream& in) {
  std::string s(read_u64(in), '\0');
  in.read(s.data(), static_cast<std::streamsize>(s.size()));
  return s;
}

Matrix read_matrix(std::istream& in) {
  const auto rows = static_cast<Index>(read_u64(in));
  const auto cols = static_cast<Index>(read_u64(in));
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  return m;
}

Vector read_vector(std::istream& in) {
  const auto n = static_cast<Index>(read_u64(in));
  Vector v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}

}  // namespace

void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model artifact: " + path);
  out.write(kMagic, 6);

  write_u64(out, static_cast<std::uint64_t>(model.enc.kind));
  write_u64(out, static_cast<std::uint64_t>(model.enc.sentence_dim));
  write_u64(out, model.enc.cnn_widths.size());
  for (auto w : model.enc.cnn_widths) write_u64(out, static_cast<std::uint64_t>(w));
  for (auto m : model.enc.cnn_maps) write_u64(out, static_cast<std::uint64_t>(m));
  write_u64(out, static_cast<std::uint64_t>(model.enc.bilstm_hidden));
  write_f64(out, model.enc.dropout);
  write_u64(out, static_cast<std::uint64_t>(model.enc.max_seq_len));

  write_u64(out, static_cast<std::uint64_t>(model.cfg.mode));
  write_f64(out, model.cfg.learning_rate);
  write_u64(out, static_cast<std::uint64_t>(model.cfg.batch_size));
  write_u64(out, static_cast<std::uint64_t>(model.cfg.max_epochs));
  write_u64(out, static_cast<std::uint64_t>(model.cfg.patience));
  write_u64(out, model.cfg.seed);
  write_u64(out, static_cast<std::uint64_t>(model.cfg.num_classes));

  write_u64(out, model.has_adapt ? 1 : 0);
  write_f64(out, model.adapt.alpha);
  write_f64(out, model.adapt.beta);

  write_u64(out, model.cnn.w.size());
  for (std::size_t i = 0; i < model.cnn.w.size(); ++i) {
    write_matrix(out, model.cnn.w[i]);
    write_vector(out, model.cnn.b[i]);
  }
  for (const auto* dir : {&model.lstm.fwd, &model.lstm.bwd}) {
    write_matrix(out, dir->wx);
    write_matrix(out, dir->wh);
    write_vector(out, dir->b);
  }
  write_matrix(out, model.cls.w);
  write_vector(out, model.cls.b);

  write_string(out, model.embedding_desc);
  write_u64(out, model.class_names.size());
  for (const auto& name : model.class_names) write_string(out, name);

  write_u64(out, model.history.size());
  for (const auto& h : model.history) {
    write_f64(out, h.train_loss);
    write_f64(out, h.train_acc);
    write_f64(out, h.dev_loss);
    write_f64(out, h.dev_acc);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model artifact: " + path);
  char magic[6] = {};
  in.read(magic, 6);
  if (std::string(magic, 6) != kMagic) {
    throw std::runtime_error(path + ": not a DAEMB1 model artifact");
  }

  TrainedModel model;
  model.enc.kind = static_cast<EncoderKind>(read_u64(in));
  model.enc.sentence_dim = static_cast<Index>(read_u64(in));
  const std::size_t groups = read_u64(in);
  model.enc.cnn_widths.resize(groups);
  model.enc.cnn_maps.resize(groups);
  for (auto& w : model.enc.cnn_widths) w = static_cast<Index>(read_u64(in));
  for (auto& m : model.enc.cnn_maps) m = static_cast<Index>(read_u64(in));
  model.enc.bilstm_hidden = static_cast<Index>(read_u64(in));
  model.enc.dropout = read_f64(in);
  model.enc.max_seq_len = static_cast<Index>(read_u64(in));

  model.cfg.mode = static_cast<TrainMode>(read_u64(in));
  model.cfg.learning_rate = read_f64(in);
  model.cfg.batch_size = static_cast<Index>(read_u64(in));
  model.cfg.max_epochs = static_cast<Index>(read_u64(in));
  model.cfg.patience = static_cast<Index>(read_u64(in));
  model.cfg.seed = read_u64(in);
  model.cfg.num_classes = static_cast<int>(read_u64(in));

  model.has_adapt = read_u64(in) != 0;
  model.adapt.alpha = read_f64(in);
  model.adapt.beta = read_f64(in);

  const std::size_t cnn_groups = read_u64(in);
  for (std::size_t i = 0; i < cnn_groups; ++i) {
    model.cnn.w.push_back(read_matrix(in));
    model.cnn.b.push_back(read_vector(in));
  }
  for (auto* dir : {&model.lstm.fwd, &model.lstm.bwd}) {
    dir->wx = read_matrix(in);
    dir->wh = read_matrix(in);
    dir->b = read_vector(in);
  }
  model.cls.w = read_matrix(in);
  model.cls.b = read_vector(in);

  model.embedding_desc = read_string(in);
  const std::size_t classes = read_u64(in);
  for (std::size_t i = 0; i < classes; ++i) model.class_names.push_back(read_string(in));

  const std::size_t epochs = read_u64(in);
  for (std::size_t i = 0; i < epochs; ++i) {
    TrainedModel::EpochStats h;
    h.train_loss = read_f64(in);
    h.train_acc = read_f64(in);
    h.dev_loss = read_f64(in);
    h.dev_acc = read_f64(in);
    model.history.push_back(h);
  }
  if (!in) throw std::runtime_error(path + ": truncated model artifact");
  return model;
}

}  // namespace daemb
