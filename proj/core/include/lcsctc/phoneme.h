// lcsctc/phoneme.h
//
// The stress-less ARPAbet (CMU) phoneme inventory, per-phoneme articulatory
// profiles, CTC vocabularies and the phoneme similarity function.
//
// Similarity is the fraction of the eight articulatory features on which two
// profiles agree. A feature that is "not applicable" in both profiles counts
// as agreement only when the phoneme types agree, so a vowel and a consonant
// never agree through shared NA values.

#ifndef LCSCTC_PHONEME_H_
#define LCSCTC_PHONEME_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcsctc/matrix.h"

namespace lcsctc {

enum class PhonemeType : std::uint8_t { kVowel, kConsonant };
enum class VowelLength : std::uint8_t { kNA, kShort, kLong, kDiphthong };
enum class Height : std::uint8_t { kNA, kHigh, kMid, kLow };
enum class Frontness : std::uint8_t { kNA, kFront, kCentral, kBack };
enum class Rounding : std::uint8_t { kNA, kRounded, kUnrounded };
enum class Manner : std::uint8_t {
  kNA, kStop, kFricative, kAffricate, kNasal, kLiquid, kGlide
};
enum class Place : std::uint8_t {
  kNA, kBilabial, kLabiodental, kDental, kAlveolar, kPostalveolar, kPalatal,
  kVelar, kGlottal
};
enum class Voicing : std::uint8_t { kNA, kVoiced, kVoiceless };

inline constexpr int kNumArticulatoryFeatures = 8;
inline constexpr int kNumArpabetPhonemes = 39;
inline constexpr std::string_view kBlankSymbol = "<blank>";

struct ArticulatoryProfile {
  PhonemeType type = PhonemeType::kVowel;
  VowelLength length = VowelLength::kNA;
  Height height = Height::kNA;
  Frontness frontness = Frontness::kNA;
  Rounding rounding = Rounding::kNA;
  Manner manner = Manner::kNA;
  Place place = Place::kNA;
  Voicing voicing = Voicing::kNA;

  // Vowels carry only vowel features, consonants only consonant features.
  bool IsConsistent() const;

  friend bool operator==(const ArticulatoryProfile &,
                         const ArticulatoryProfile &) = default;
};

// Number of features (0..8) on which the two profiles agree.
int FeatureAgreement(const ArticulatoryProfile &a,
                     const ArticulatoryProfile &b);

// FeatureAgreement / 8.
double ProfileSimilarity(const ArticulatoryProfile &a,
                         const ArticulatoryProfile &b);

// The 39 symbols in canonical (alphabetical) order.
const std::array<std::string_view, kNumArpabetPhonemes> &ArpabetSymbols();

// Upper-cases and strips trailing stress digits: "ih1" -> "IH".
std::string NormalizeSymbol(std::string_view symbol);

// Splits on whitespace and normalizes every token.
std::vector<std::string> ParseLabels(std::string_view text);

std::string JoinLabels(std::span<const std::string> labels);

// Ordered CTC output alphabet: a set of phoneme symbols plus one blank.
class Vocabulary {
 public:
  // Blank only.
  Vocabulary();
  // Blank gets id 0, phonemes follow in the given order.
  explicit Vocabulary(std::span<const std::string> phoneme_symbols);

  // Row labels as found in an emission file; exactly one must be the blank.
  static Vocabulary FromRowLabels(std::span<const std::string> labels);

  int size() const { return static_cast<int>(symbols_.size()); }
  int blank_id() const { return blank_id_; }
  const std::string &symbol(int id) const { return symbols_.at(id); }
  const std::vector<std::string> &symbols() const { return symbols_; }

  std::optional<int> Find(std::string_view symbol) const;
  // Throws DomainError for symbols outside the vocabulary.
  int Id(std::string_view symbol) const;
  std::vector<int> Ids(std::span<const std::string> symbols) const;

  friend bool operator==(const Vocabulary &a, const Vocabulary &b) {
    return a.symbols_ == b.symbols_;
  }

 private:
  void Index();

  std::vector<std::string> symbols_;
  std::map<std::string, int, std::less<>> ids_;
  int blank_id_ = 0;
};

// Symmetric phoneme-by-phoneme similarity matrix with unit diagonal and
// entries in [0, 1]. Excludes the blank.
class SimilarityTable {
 public:
  // Throws DomainError if the values violate the table invariants.
  SimilarityTable(std::vector<std::string> symbols, Matrix values);

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::vector<std::string> &symbols() const { return symbols_; }
  const Matrix &values() const { return values_; }

  std::optional<int> Find(std::string_view symbol) const;
  // Throws DomainError for the blank and for unknown symbols.
  int Index(std::string_view symbol) const;

  double operator()(int a, int b) const { return values_(a, b); }
  double at(std::string_view p, std::string_view q) const {
    return values_(Index(p), Index(q));
  }

 private:
  std::vector<std::string> symbols_;
  std::map<std::string, int, std::less<>> index_;
  Matrix values_;
};

struct Phoneme {
  std::string symbol;
  int id = 0;
};

// The 39 phonemes with their profiles. Phoneme ids follow the canonical
// symbol order starting at 1; id 0 is reserved for the blank.
class PhonemeInventory {
 public:
  // The embedded default profile table.
  static const PhonemeInventory &Default();

  // Parses the tab-separated phoneme-table format. Throws ParseError naming
  // the offending line.
  static PhonemeInventory Parse(std::string_view text);
  static PhonemeInventory Load(const std::filesystem::path &path);

  static constexpr int blank_id() { return 0; }
  int vocab_size() const { return static_cast<int>(phonemes_.size()) + 1; }
  const std::vector<Phoneme> &phonemes() const { return phonemes_; }

  bool Contains(std::string_view symbol) const;
  // Throws DomainError for the blank or unknown symbols.
  const ArticulatoryProfile &profile(std::string_view symbol) const;

  double Similarity(std::string_view p, std::string_view q) const;
  SimilarityTable BuildSimilarityTable() const;

  // Blank followed by all 39 phonemes, ids matching phonemes().
  Vocabulary FullVocabulary() const;

 private:
  std::vector<Phoneme> phonemes_;
  std::map<std::string, ArticulatoryProfile, std::less<>> profiles_;
};

// Text of the embedded default table.
std::string_view DefaultPhonemeTable();

}  // namespace lcsctc

#endif  // LCSCTC_PHONEME_H_
