// lcsctc/io.cc

#include "lcsctc/io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "lcsctc/errors.h"

namespace lcsctc {

namespace {

using nlohmann::json;

// Shortest decimal that parses back to the same binary64.
void AppendDouble(std::string &out, double v) {
  if (!std::isfinite(v)) throw DomainError("cannot serialize a non-finite value");
  if (v == 0.0 && std::signbit(v)) {
    out += "-0.0";
    return;
  }
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("number formatting failed");
  out.append(buf, end);
}

json ParseJson(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

template <typename T>
T Field(const json &obj, const char *key) {
  if (!obj.is_object() || !obj.contains(key))
    throw ParseError(std::string("missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ParseError(std::string("bad field '") + key + "': " + e.what());
  }
}

MatrixKind ParseKind(const std::string &s) {
  if (s == "cost") return MatrixKind::kCost;
  if (s == "emission") return MatrixKind::kEmission;
  if (s == "mask") return MatrixKind::kMask;
  throw ParseError("unknown matrix kind '" + s + "'");
}

void ExpectKind(const LabeledMatrix &m, MatrixKind kind) {
  if (m.kind != kind)
    throw ParseError("expected a '" + std::string(MatrixKindName(kind)) +
                     "' matrix, got '" + std::string(MatrixKindName(m.kind)) +
                     "'");
}

BitMatrix ToBits(const Matrix &m) {
  BitMatrix bits(m.rows(), m.cols(), 0);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) bits(i, j) = m(i, j) != 0.0 ? 1 : 0;
  return bits;
}

Matrix ToMatrix(const BitMatrix &b) {
  Matrix m(b.rows(), b.cols());
  for (int i = 0; i < b.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) m(i, j) = b(i, j);
  return m;
}

json MatrixToJsonValue(const Matrix &m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

Matrix MatrixFromJsonValue(const json &rows, const char *what) {
  if (!rows.is_array()) throw ParseError(std::string(what) + " must be an array");
  const int n = static_cast<int>(rows.size());
  const int cols = n ? static_cast<int>(rows[0].size()) : 0;
  Matrix m(n, cols);
  for (int i = 0; i < n; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != cols)
      throw ParseError(std::string(what) + " is not rectangular");
    for (int j = 0; j < cols; ++j) {
      if (!rows[i][j].is_number())
        throw ParseError(std::string(what) + " holds a non-numeric entry");
      m(i, j) = rows[i][j].get<double>();
    }
  }
  return m;
}

}  // namespace

std::string_view MatrixKindName(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::kCost: return "cost";
    case MatrixKind::kEmission: return "emission";
    case MatrixKind::kMask: return "mask";
  }
  return "unknown";
}

LabeledMatrix ParseMatrixJson(std::string_view text) {
  const json doc = ParseJson(text);
  LabeledMatrix m;
  m.kind = ParseKind(Field<std::string>(doc, "kind"));
  m.row_labels = Field<std::vector<std::string>>(doc, "row_labels");
  const long num_frames = Field<long>(doc, "num_frames");
  if (num_frames < 1) throw ParseError("num_frames must be positive");
  if (!doc.contains("data") || !doc["data"].is_array())
    throw ParseError("missing array field 'data'");
  const json &rows = doc["data"];
  if (rows.size() != m.row_labels.size())
    throw ParseError("declared " + std::to_string(m.row_labels.size()) +
                     " row labels but data has " + std::to_string(rows.size()) +
                     " rows");

  m.data = Matrix(static_cast<int>(rows.size()), static_cast<int>(num_frames));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json &row = rows[i];
    if (!row.is_array() || static_cast<long>(row.size()) != num_frames)
      throw ParseError("row " + std::to_string(i) + " has " +
                       std::to_string(row.is_array() ? row.size() : 0) +
                       " values but num_frames is " + std::to_string(num_frames));
    for (long j = 0; j < num_frames; ++j) {
      const json &v = row[j];
      if (m.kind == MatrixKind::kMask) {
        if (!v.is_number_integer() || (v.get<long>() != 0 && v.get<long>() != 1))
          throw ParseError("mask entries must be integer 0 or 1 (row " +
                           std::to_string(i) + ")");
      } else if (!v.is_number()) {
        throw ParseError("non-numeric value in row " + std::to_string(i));
      }
      m.data(static_cast<int>(i), static_cast<int>(j)) = v.get<double>();
    }
  }
  return m;
}

std::string MatrixJson(const LabeledMatrix &m) {
  std::string out = "{\"kind\": ";
  out += json(std::string(MatrixKindName(m.kind))).dump();
  out += ", \"row_labels\": ";
  out += json(m.row_labels).dump();
  out += ", \"num_frames\": " + std::to_string(m.data.cols());
  out += ", \"data\": [";
  for (int i = 0; i < m.data.rows(); ++i) {
    out += i ? ",\n  [" : "\n  [";
    for (int j = 0; j < m.data.cols(); ++j) {
      if (j) out += ", ";
      if (m.kind == MatrixKind::kMask)
        out += m.data(i, j) != 0.0 ? '1' : '0';
      else
        AppendDouble(out, m.data(i, j));
    }
    out += ']';
  }
  out += "\n]}\n";
  return out;
}

CostMatrix ParseCostMatrix(std::string_view text) {
  LabeledMatrix m = ParseMatrixJson(text);
  ExpectKind(m, MatrixKind::kCost);
  CostMatrix c{std::move(m.row_labels), std::move(m.data)};
  for (auto &l : c.labels) l = NormalizeSymbol(l);
  ValidateCostMatrix(c);
  return c;
}

std::string CostMatrixJson(const CostMatrix &c) {
  return MatrixJson({MatrixKind::kCost, c.labels, c.values});
}

EmissionMatrix ParseEmissions(std::string_view text) {
  LabeledMatrix m = ParseMatrixJson(text);
  ExpectKind(m, MatrixKind::kEmission);
  return EmissionMatrix::FromProbabilities(Vocabulary::FromRowLabels(m.row_labels),
                                           std::move(m.data));
}

std::string EmissionsJson(const EmissionMatrix &p) {
  return MatrixJson({MatrixKind::kEmission, p.vocab().symbols(), p.probs()});
}

AlignmentMask ParseMask(std::string_view text) {
  LabeledMatrix m = ParseMatrixJson(text);
  ExpectKind(m, MatrixKind::kMask);
  AlignmentMask mask{std::move(m.row_labels), ToBits(m.data)};
  for (auto &l : mask.labels)
    if (l != kBlankSymbol) l = NormalizeSymbol(l);
  return mask;
}

std::string MaskJson(const AlignmentMask &m) {
  return MatrixJson({MatrixKind::kMask, m.labels, ToMatrix(m.bits)});
}

std::string VocabMaskJson(const BitMatrix &mask, const Vocabulary &vocab) {
  if (mask.rows() != vocab.size())
    throw DomainError("mask rows do not match the vocabulary");
  return MatrixJson({MatrixKind::kMask, vocab.symbols(), ToMatrix(mask)});
}

Segmentation ParseSegmentation(std::string_view text) {
  const json doc = ParseJson(text);
  if (!doc.contains("spans") || !doc["spans"].is_array())
    throw ParseError("segmentation needs a 'spans' array");
  Segmentation seg;
  for (const json &s : doc["spans"]) {
    seg.spans.push_back({NormalizeSymbol(Field<std::string>(s, "phoneme")),
                         Field<int>(s, "onset"), Field<int>(s, "offset")});
  }
  ValidateSegmentation(seg);
  return seg;
}

std::string SegmentationJson(const Segmentation &seg) {
  json spans = json::array();
  for (const Span &s : seg.spans)
    spans.push_back({{"phoneme", s.phoneme}, {"onset", s.onset}, {"offset", s.offset}});
  return json{{"spans", spans}}.dump() + "\n";
}

std::string ModelJson(const LinearModel &model, const SyntheticConfig &data,
                      const TrainConfig &train, const TrainingLog &log) {
  json doc;
  doc["format"] = "lcsctc-linear-model";
  doc["vocab"] = model.vocab.symbols();
  doc["weights"] = MatrixToJsonValue(model.weights);
  doc["bias"] = model.bias;
  json d;
  d["num_utts"] = data.num_utts;
  d["heldout_utts"] = data.heldout_utts;
  d["vocab_subset"] = data.vocab_subset;
  d["min_phonemes"] = data.min_phonemes;
  d["max_phonemes"] = data.max_phonemes;
  d["mean_span_frames"] = data.mean_span_frames;
  d["feature_dim"] = data.feature_dim;
  d["feature_noise"] = data.feature_noise;
  d["dysfluency_rate"] = data.dysfluency_rate;
  d["cost_noise"] = data.cost_noise;
  d["edge_sigma"] = data.edge_sigma ? json(*data.edge_sigma) : json(nullptr);
  d["seed"] = data.seed;
  doc["data_config"] = d;
  json t;
  t["objective"] = std::string(ObjectiveName(train.objective));
  t["epochs"] = train.epochs;
  t["learning_rate"] = train.learning_rate;
  t["lambda"] = train.lambda;
  t["tol"] = train.tol;
  t["cost_floor"] = train.cost_floor;
  t["epsilon"] = train.epsilon;
  t["refresh_masks"] = train.refresh_masks;
  t["init_scale"] = train.init_scale;
  t["seed"] = train.seed;
  doc["train_config"] = t;
  doc["log"] = {{"epoch_loss", log.epoch_loss},
                {"final_loss", log.final_loss},
                {"anchored_frames", log.anchored_frames}};
  return doc.dump(1) + "\n";
}

SavedModel ParseModel(std::string_view text) {
  const json doc = ParseJson(text);
  if (Field<std::string>(doc, "format") != "lcsctc-linear-model")
    throw ParseError("not an lcsctc linear model file");
  SavedModel out;
  out.model.vocab =
      Vocabulary::FromRowLabels(Field<std::vector<std::string>>(doc, "vocab"));
  out.model.weights = MatrixFromJsonValue(doc["weights"], "weights");
  out.model.bias = Field<std::vector<double>>(doc, "bias");
  if (out.model.weights.cols() != out.model.vocab.size() ||
      static_cast<int>(out.model.bias.size()) != out.model.vocab.size())
    throw ParseError("model dimensions do not match its vocabulary");

  const json &d = doc.at("data_config");
  out.data.num_utts = Field<int>(d, "num_utts");
  out.data.heldout_utts = Field<int>(d, "heldout_utts");
  out.data.vocab_subset = Field<std::vector<std::string>>(d, "vocab_subset");
  out.data.min_phonemes = Field<int>(d, "min_phonemes");
  out.data.max_phonemes = Field<int>(d, "max_phonemes");
  out.data.mean_span_frames = Field<double>(d, "mean_span_frames");
  out.data.feature_dim = Field<int>(d, "feature_dim");
  out.data.feature_noise = Field<double>(d, "feature_noise");
  out.data.dysfluency_rate = Field<double>(d, "dysfluency_rate");
  out.data.cost_noise = Field<double>(d, "cost_noise");
  if (d.contains("edge_sigma") && !d["edge_sigma"].is_null())
    out.data.edge_sigma = Field<double>(d, "edge_sigma");
  else
    out.data.edge_sigma.reset();
  out.data.seed = Field<std::uint64_t>(d, "seed");

  const json &t = doc.at("train_config");
  out.train.objective = ParseObjective(Field<std::string>(t, "objective"));
  out.train.epochs = Field<int>(t, "epochs");
  out.train.learning_rate = Field<double>(t, "learning_rate");
  out.train.lambda = Field<double>(t, "lambda");
  out.train.tol = Field<double>(t, "tol");
  out.train.cost_floor = Field<double>(t, "cost_floor");
  out.train.epsilon = Field<double>(t, "epsilon");
  out.train.refresh_masks = Field<bool>(t, "refresh_masks");
  out.train.init_scale = Field<double>(t, "init_scale");
  out.train.seed = Field<std::uint64_t>(t, "seed");

  const json &l = doc.at("log");
  out.log.epoch_loss = Field<std::vector<double>>(l, "epoch_loss");
  out.log.final_loss = Field<double>(l, "final_loss");
  out.log.anchored_frames = Field<std::vector<int>>(l, "anchored_frames");
  return out;
}

std::string ReadFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFileAtomic(const std::filesystem::path &path,
                     std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace lcsctc
