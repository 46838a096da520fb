// lcsctc/phoneme.cc

#include "lcsctc/phoneme.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "lcsctc/errors.h"

namespace lcsctc {

namespace {

constexpr std::string_view kDefaultTable =
#include "default_phoneme_table.inc"
    ;

constexpr std::array<std::string_view, kNumArticulatoryFeatures>
    kFeatureNames = {"type",     "length", "height", "frontness",
                     "rounding", "manner", "place",  "voicing"};

template <typename Enum>
struct Token {
  std::string_view text;
  Enum value;
};

template <typename Enum, std::size_t N>
std::optional<Enum> LookupToken(const std::array<Token<Enum>, N> &tokens,
                                std::string_view text) {
  for (const auto &t : tokens)
    if (t.text == text) return t.value;
  return std::nullopt;
}

constexpr std::array<Token<PhonemeType>, 2> kTypeTokens = {{
    {"vowel", PhonemeType::kVowel},
    {"consonant", PhonemeType::kConsonant},
}};
constexpr std::array<Token<VowelLength>, 4> kLengthTokens = {{
    {"NA", VowelLength::kNA},
    {"short", VowelLength::kShort},
    {"long", VowelLength::kLong},
    {"diphthong", VowelLength::kDiphthong},
}};
constexpr std::array<Token<Height>, 4> kHeightTokens = {{
    {"NA", Height::kNA},
    {"high", Height::kHigh},
    {"mid", Height::kMid},
    {"low", Height::kLow},
}};
constexpr std::array<Token<Frontness>, 4> kFrontnessTokens = {{
    {"NA", Frontness::kNA},
    {"front", Frontness::kFront},
    {"central", Frontness::kCentral},
    {"back", Frontness::kBack},
}};
constexpr std::array<Token<Rounding>, 3> kRoundingTokens = {{
    {"NA", Rounding::kNA},
    {"rounded", Rounding::kRounded},
    {"unrounded", Rounding::kUnrounded},
}};
constexpr std::array<Token<Manner>, 7> kMannerTokens = {{
    {"NA", Manner::kNA},
    {"stop", Manner::kStop},
    {"fricative", Manner::kFricative},
    {"affricate", Manner::kAffricate},
    {"nasal", Manner::kNasal},
    {"liquid", Manner::kLiquid},
    {"glide", Manner::kGlide},
}};
constexpr std::array<Token<Place>, 9> kPlaceTokens = {{
    {"NA", Place::kNA},
    {"bilabial", Place::kBilabial},
    {"labiodental", Place::kLabiodental},
    {"dental", Place::kDental},
    {"alveolar", Place::kAlveolar},
    {"postalveolar", Place::kPostalveolar},
    {"palatal", Place::kPalatal},
    {"velar", Place::kVelar},
    {"glottal", Place::kGlottal},
}};
constexpr std::array<Token<Voicing>, 3> kVoicingTokens = {{
    {"NA", Voicing::kNA},
    {"voiced", Voicing::kVoiced},
    {"voiceless", Voicing::kVoiceless},
}};

template <typename Enum, std::size_t N>
Enum ParseFeature(const std::array<Token<Enum>, N> &tokens,
                  std::string_view text, int feature, int line) {
  if (auto v = LookupToken(tokens, text)) return *v;
  throw ParseError("unknown value '" + std::string(text) + "' for feature " +
                       std::string(kFeatureNames[feature]),
                   line);
}

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    std::string_view f = line.substr(start, tab - start);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\r'))
      f.remove_suffix(1);
    while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
    fields.push_back(f);
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  while (!fields.empty() && fields.back().empty()) fields.pop_back();
  return fields;
}

}  // namespace

bool ArticulatoryProfile::IsConsistent() const {
  const bool vowel_features_na =
      length == VowelLength::kNA && height == Height::kNA &&
      frontness == Frontness::kNA && rounding == Rounding::kNA;
  const bool consonant_features_na =
      manner == Manner::kNA && place == Place::kNA && voicing == Voicing::kNA;
  if (type == PhonemeType::kVowel)
    return consonant_features_na && length != VowelLength::kNA &&
           height != Height::kNA && frontness != Frontness::kNA &&
           rounding != Rounding::kNA;
  return vowel_features_na && manner != Manner::kNA && place != Place::kNA &&
         voicing != Voicing::kNA;
}

int FeatureAgreement(const ArticulatoryProfile &a,
                     const ArticulatoryProfile &b) {
  const bool same_type = a.type == b.type;
  // A shared NA only counts when the phoneme types agree.
  auto agree = [same_type](auto x, auto y) {
    using E = decltype(x);
    if (x != y) return 0;
    return (x == E::kNA && !same_type) ? 0 : 1;
  };
  return (same_type ? 1 : 0) + agree(a.length, b.length) +
         agree(a.height, b.height) + agree(a.frontness, b.frontness) +
         agree(a.rounding, b.rounding) + agree(a.manner, b.manner) +
         agree(a.place, b.place) + agree(a.voicing, b.voicing);
}

double ProfileSimilarity(const ArticulatoryProfile &a,
                         const ArticulatoryProfile &b) {
  return static_cast<double>(FeatureAgreement(a, b)) /
         kNumArticulatoryFeatures;
}

const std::array<std::string_view, kNumArpabetPhonemes> &ArpabetSymbols() {
  static constexpr std::array<std::string_view, kNumArpabetPhonemes> kSymbols =
      {"AA", "AE", "AH", "AO", "AW", "AY", "B",  "CH", "D",  "DH",
       "EH", "ER", "EY", "F",  "G",  "HH", "IH", "IY", "JH", "K",
       "L",  "M",  "N",  "NG", "OW", "OY", "P",  "R",  "S",  "SH",
       "T",  "TH", "UH", "UW", "V",  "W",  "Y",  "Z",  "ZH"};
  return kSymbols;
}

std::string NormalizeSymbol(std::string_view symbol) {
  std::string out(symbol);
  if (out == kBlankSymbol) return out;
  while (!out.empty() && std::isdigit(static_cast<unsigned char>(out.back())))
    out.pop_back();
  for (char &c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> ParseLabels(std::string_view text) {
  std::vector<std::string> labels;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) labels.push_back(NormalizeSymbol(token));
  return labels;
}

std::string JoinLabels(std::span<const std::string> labels) {
  std::string out;
  for (const auto &l : labels) {
    if (!out.empty()) out += ' ';
    out += l;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary() : symbols_{std::string(kBlankSymbol)} { Index(); }

Vocabulary::Vocabulary(std::span<const std::string> phoneme_symbols) {
  symbols_.reserve(phoneme_symbols.size() + 1);
  symbols_.emplace_back(kBlankSymbol);
  for (const auto &s : phoneme_symbols) symbols_.push_back(NormalizeSymbol(s));
  blank_id_ = 0;
  Index();
}

Vocabulary Vocabulary::FromRowLabels(std::span<const std::string> labels) {
  Vocabulary v;
  v.symbols_.clear();
  int blanks = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kBlankSymbol) {
      v.blank_id_ = static_cast<int>(i);
      ++blanks;
      v.symbols_.push_back(labels[i]);
    } else {
      v.symbols_.push_back(NormalizeSymbol(labels[i]));
    }
  }
  if (blanks != 1)
    throw DomainError("vocabulary must contain exactly one '" +
                      std::string(kBlankSymbol) + "' entry, found " +
                      std::to_string(blanks));
  v.Index();
  return v;
}

void Vocabulary::Index() {
  ids_.clear();
  for (int i = 0; i < size(); ++i) {
    if (!ids_.emplace(symbols_[i], i).second)
      throw DomainError("duplicate vocabulary symbol '" + symbols_[i] + "'");
  }
}

std::optional<int> Vocabulary::Find(std::string_view symbol) const {
  auto it = ids_.find(symbol);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::Id(std::string_view symbol) const {
  if (auto id = Find(symbol)) return *id;
  throw DomainError("symbol '" + std::string(symbol) +
                    "' is not in the vocabulary");
}

std::vector<int> Vocabulary::Ids(std::span<const std::string> symbols) const {
  std::vector<int> ids;
  ids.reserve(symbols.size());
  for (const auto &s : symbols) ids.push_back(Id(s));
  return ids;
}

// ---------------------------------------------------------------------------
// SimilarityTable

SimilarityTable::SimilarityTable(std::vector<std::string> symbols,
                                 Matrix values)
    : symbols_(std::move(symbols)), values_(std::move(values)) {
  const int n = size();
  if (values_.rows() != n || values_.cols() != n)
    throw DomainError("similarity table shape does not match symbol count");
  for (int i = 0; i < n; ++i) {
    if (symbols_[i] == kBlankSymbol)
      throw DomainError("similarity table cannot contain the blank");
    if (!index_.emplace(symbols_[i], i).second)
      throw DomainError("duplicate symbol '" + symbols_[i] +
                        "' in similarity table");
    if (values_(i, i) != 1.0)
      throw DomainError("similarity of '" + symbols_[i] +
                        "' with itself must be 1");
    for (int j = 0; j < n; ++j) {
      const double v = values_(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw DomainError("similarity values must lie in [0, 1]");
      if (v != values_(j, i))
        throw DomainError("similarity table must be symmetric");
    }
  }
}

std::optional<int> SimilarityTable::Find(std::string_view symbol) const {
  auto it = index_.find(symbol);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int SimilarityTable::Index(std::string_view symbol) const {
  if (symbol == kBlankSymbol)
    throw DomainError("similarity is undefined for the blank");
  if (auto i = Find(symbol)) return *i;
  throw DomainError("phoneme '" + std::string(symbol) +
                    "' is not in the similarity table");
}

// ---------------------------------------------------------------------------
// PhonemeInventory

std::string_view DefaultPhonemeTable() { return kDefaultTable; }

const PhonemeInventory &PhonemeInventory::Default() {
  static const PhonemeInventory inventory = Parse(kDefaultTable);
  return inventory;
}

PhonemeInventory PhonemeInventory::Parse(std::string_view text) {
  const auto &canonical = ArpabetSymbols();
  PhonemeInventory inv;
  std::map<std::string, int, std::less<>> seen_on_line;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    auto fields = SplitTabs(line);
    if (fields.empty()) continue;

    const std::string symbol = NormalizeSymbol(fields[0]);
    if (std::find(canonical.begin(), canonical.end(), symbol) ==
        canonical.end())
      throw ParseError("unknown phoneme symbol '" + std::string(fields[0]) +
                           "'",
                       line_no);
    if (auto it = seen_on_line.find(symbol); it != seen_on_line.end())
      throw ParseError("duplicate phoneme symbol '" + symbol +
                           "' (first defined on line " +
                           std::to_string(it->second) + ")",
                       line_no);
    if (fields.size() < 1 + kNumArticulatoryFeatures)
      throw ParseError("missing feature '" +
                           std::string(kFeatureNames[fields.size() - 1]) +
                           "' for phoneme " + symbol,
                       line_no);
    if (fields.size() > 1 + kNumArticulatoryFeatures)
      throw ParseError("too many fields for phoneme " + symbol, line_no);
    for (std::size_t f = 1; f < fields.size(); ++f)
      if (fields[f].empty())
        throw ParseError("missing feature '" +
                             std::string(kFeatureNames[f - 1]) +
                             "' for phoneme " + symbol,
                         line_no);

    ArticulatoryProfile p;
    p.type = ParseFeature(kTypeTokens, fields[1], 0, line_no);
    p.length = ParseFeature(kLengthTokens, fields[2], 1, line_no);
    p.height = ParseFeature(kHeightTokens, fields[3], 2, line_no);
    p.frontness = ParseFeature(kFrontnessTokens, fields[4], 3, line_no);
    p.rounding = ParseFeature(kRoundingTokens, fields[5], 4, line_no);
    p.manner = ParseFeature(kMannerTokens, fields[6], 5, line_no);
    p.place = ParseFeature(kPlaceTokens, fields[7], 6, line_no);
    p.voicing = ParseFeature(kVoicingTokens, fields[8], 7, line_no);
    if (!p.IsConsistent())
      throw ParseError("inconsistent profile for phoneme " + symbol +
                           ": vowels need only vowel features and consonants "
                           "only consonant features",
                       line_no);

    seen_on_line.emplace(symbol, line_no);
    inv.profiles_.emplace(symbol, p);
  }

  std::string missing;
  for (std::size_t i = 0; i < canonical.size(); ++i) {
    if (!inv.profiles_.contains(canonical[i])) {
      if (!missing.empty()) missing += ' ';
      missing += canonical[i];
      continue;
    }
    inv.phonemes_.push_back(
        Phoneme{std::string(canonical[i]), static_cast<int>(i) + 1});
  }
  if (!missing.empty())
    throw ParseError("phoneme table is missing profiles for: " + missing);
  return inv;
}

PhonemeInventory PhonemeInventory::Load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open phoneme table " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

bool PhonemeInventory::Contains(std::string_view symbol) const {
  return profiles_.contains(symbol);
}

const ArticulatoryProfile &PhonemeInventory::profile(
    std::string_view symbol) const {
  if (symbol == kBlankSymbol)
    throw DomainError("the blank has no articulatory profile");
  auto it = profiles_.find(symbol);
  if (it == profiles_.end())
    throw DomainError("phoneme '" + std::string(symbol) +
                      "' is not in the inventory");
  return it->second;
}

double PhonemeInventory::Similarity(std::string_view p,
                                    std::string_view q) const {
  return ProfileSimilarity(profile(p), profile(q));
}

SimilarityTable PhonemeInventory::BuildSimilarityTable() const {
  const int n = static_cast<int>(phonemes_.size());
  std::vector<std::string> symbols;
  symbols.reserve(n);
  for (const auto &p : phonemes_) symbols.push_back(p.symbol);
  Matrix values(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      values(i, j) = Similarity(symbols[i], symbols[j]);
  return SimilarityTable(std::move(symbols), std::move(values));
}

Vocabulary PhonemeInventory::FullVocabulary() const {
  std::vector<std::string> symbols;
  for (const auto &p : phonemes_) symbols.push_back(p.symbol);
  return Vocabulary(symbols);
}

}  // namespace lcsctc
