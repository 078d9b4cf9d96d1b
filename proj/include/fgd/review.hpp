#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fgd {

/// Dense ids assigned by ReviewTable in lexicographic order of the raw keys.
enum class ReviewerId : std::uint32_t {};
enum class ProductId : std::uint32_t {};

constexpr std::uint32_t index(ReviewerId id) { return static_cast<std::uint32_t>(id); }
constexpr std::uint32_t index(ProductId id) { return static_cast<std::uint32_t>(id); }

using Date = std::chrono::sys_days;

enum class Label : std::uint8_t { Unknown, Fake, Genuine };

/// Parses an ISO "YYYY-MM-DD" day. Returns nullopt on malformed or invalid days.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

/// A review as read from disk, before id interning.
struct RawReview {
  std::string reviewer;
  std::string product;
  int rating = 0;
  Date date{};
  Label label = Label::Unknown;

  bool operator==(const RawReview&) const = default;
};

struct Review {
  ReviewerId reviewer{};
  ProductId product{};
  int rating = 0;
  Date date{};
  Label label = Label::Unknown;

  bool operator==(const Review&) const = default;
};

/**
 * Immutable table of validated reviews with reviewer and product indices.
 *
 * Ids are interned in sorted key order so that two tables holding the same
 * multiset of reviews assign identical ids regardless of input row order.
 * Reviews keep their input order.
 */
class ReviewTable {
 public:
  ReviewTable() = default;
  explicit ReviewTable(std::vector<RawReview> rows);

  std::size_t size() const { return reviews_.size(); }
  bool empty() const { return reviews_.empty(); }
  const std::vector<Review>& reviews() const { return reviews_; }

  std::size_t reviewer_count() const { return reviewer_names_.size(); }
  std::size_t product_count() const { return product_names_.size(); }

  const std::string& name(ReviewerId id) const { return reviewer_names_.at(index(id)); }
  const std::string& name(ProductId id) const { return product_names_.at(index(id)); }

  std::optional<ReviewerId> find_reviewer(std::string_view key) const;
  std::optional<ProductId> find_product(std::string_view key) const;

  /// Positions into reviews() for one reviewer / product.
  const std::vector<std::size_t>& by_reviewer(ReviewerId id) const {
    return by_reviewer_.at(index(id));
  }
  const std::vector<std::size_t>& by_product(ProductId id) const {
    return by_product_.at(index(id));
  }

  bool has_labels() const;
  std::vector<RawReview> to_raw() const;

  bool operator==(const ReviewTable& other) const;

 private:
  std::vector<Review> reviews_;
  std::vector<std::string> reviewer_names_;
  std::vector<std::string> product_names_;
  std::vector<std::vector<std::size_t>> by_reviewer_;
  std::vector<std::vector<std::size_t>> by_product_;
};

// ---------------------------------------------------------------------------
// Parsing

struct ParseOptions {
  char delimiter = ',';
  bool header = false;
  /// Label strings mapped to Fake / Genuine. Empty or absent label -> Unknown.
  std::vector<std::string> fake_labels{"-1"};
  std::vector<std::string> genuine_labels{"1"};
};

struct RowError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParseResult {
  ReviewTable table;
  std::vector<RowError> errors;
  std::size_t rows_read = 0;   // non-empty data rows, valid or not
  bool label_column = false;   // at least one row carried a label column
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Reads delimited review rows. Five columns are read as
 * reviewer, product, rating, label, date (the Yelp metadata layout); four
 * columns as reviewer, product, rating, date with no label. Ratings may be
 * written as integers or integral decimals ("5.0").
 *
 * Malformed rows are recorded in ParseResult::errors with their line number
 * and excluded from the table. Throws IoError if the file cannot be read.
 */
ParseResult parse_reviews(const std::filesystem::path& path, const ParseOptions& opts = {});
ParseResult parse_reviews(std::istream& in, const ParseOptions& opts = {});

/// Writes the five-column layout; labels are emitted using the first
/// configured fake/genuine strings and Unknown as an empty field.
void write_reviews(std::ostream& out, const ReviewTable& table, const ParseOptions& opts = {});

// ---------------------------------------------------------------------------

enum class DedupPolicy { KeepLatest, KeepFirst };

/// One review per (reviewer, product). KeepLatest retains the latest-dated
/// review, KeepFirst the earliest; equal dates fall back to input order.
ReviewTable dedupe(const ReviewTable& table, DedupPolicy policy = DedupPolicy::KeepLatest);

struct ProductStats {
  double avg_rating = 0.0;
  std::size_t review_count = 0;
};

/// Indexed by ProductId.
std::vector<ProductStats> product_stats(const ReviewTable& table);

}  // namespace fgd
