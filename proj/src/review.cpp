#include "fgd/review.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace fgd {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::optional<int> parse_rating(std::string_view s) {
  int v = 0;
  if (parse_int(s, v)) return v;
  // Yelp metadata writes ratings as "5.0".
  std::string buf(s);
  char* end = nullptr;
  double d = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(d)) return std::nullopt;
  if (d != std::floor(d) || std::abs(d) > 1e6) return std::nullopt;
  return static_cast<int>(d);
}

template <typename Id>
std::vector<std::string> intern(const std::vector<RawReview>& rows, std::string RawReview::*field,
                                std::unordered_map<std::string, std::uint32_t>& lookup) {
  std::vector<std::string> names;
  names.reserve(rows.size());
  for (const auto& r : rows) names.push_back(r.*field);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  lookup.reserve(names.size());
  for (std::uint32_t i = 0; i < names.size(); ++i) lookup.emplace(names[i], i);
  return names;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  text = trim(text);
  // YYYY-MM-DD
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
      !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd};
}

std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

// ---------------------------------------------------------------------------

ReviewTable::ReviewTable(std::vector<RawReview> rows) {
  std::unordered_map<std::string, std::uint32_t> reviewer_lookup, product_lookup;
  reviewer_names_ = intern<ReviewerId>(rows, &RawReview::reviewer, reviewer_lookup);
  product_names_ = intern<ProductId>(rows, &RawReview::product, product_lookup);

  reviews_.reserve(rows.size());
  by_reviewer_.resize(reviewer_names_.size());
  by_product_.resize(product_names_.size());
  for (const auto& r : rows) {
    Review rv{ReviewerId{reviewer_lookup.at(r.reviewer)}, ProductId{product_lookup.at(r.product)},
              r.rating, r.date, r.label};
    by_reviewer_[index(rv.reviewer)].push_back(reviews_.size());
    by_product_[index(rv.product)].push_back(reviews_.size());
    reviews_.push_back(rv);
  }
}

std::optional<ReviewerId> ReviewTable::find_reviewer(std::string_view key) const {
  auto it = std::lower_bound(reviewer_names_.begin(), reviewer_names_.end(), key);
  if (it == reviewer_names_.end() || *it != key) return std::nullopt;
  return ReviewerId{static_cast<std::uint32_t>(it - reviewer_names_.begin())};
}

std::optional<ProductId> ReviewTable::find_product(std::string_view key) const {
  auto it = std::lower_bound(product_names_.begin(), product_names_.end(), key);
  if (it == product_names_.end() || *it != key) return std::nullopt;
  return ProductId{static_cast<std::uint32_t>(it - product_names_.begin())};
}

bool ReviewTable::has_labels() const {
  return std::any_of(reviews_.begin(), reviews_.end(),
                     [](const Review& r) { return r.label != Label::Unknown; });
}

std::vector<RawReview> ReviewTable::to_raw() const {
  std::vector<RawReview> out;
  out.reserve(reviews_.size());
  for (const auto& r : reviews_) {
    out.push_back({name(r.reviewer), name(r.product), r.rating, r.date, r.label});
  }
  return out;
}

bool ReviewTable::operator==(const ReviewTable& other) const {
  return reviews_ == other.reviews_ && reviewer_names_ == other.reviewer_names_ &&
         product_names_ == other.product_names_;
}

// ---------------------------------------------------------------------------

ParseResult parse_reviews(const std::filesystem::path& path, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open review file: " + path.string());
  return parse_reviews(in, opts);
}

ParseResult parse_reviews(std::istream& in, const ParseOptions& opts) {
  ParseResult result;
  std::vector<RawReview> rows;
  std::string line;
  std::size_t lineno = 0;

  auto label_of = [&](std::string_view s) -> std::optional<Label> {
    if (s.empty()) return Label::Unknown;
    if (std::find(opts.fake_labels.begin(), opts.fake_labels.end(), s) != opts.fake_labels.end()) {
      return Label::Fake;
    }
    if (std::find(opts.genuine_labels.begin(), opts.genuine_labels.end(), s) !=
        opts.genuine_labels.end()) {
      return Label::Genuine;
    }
    return std::nullopt;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && opts.header) continue;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    ++result.rows_read;

    auto fail = [&](std::string msg) { result.errors.push_back({lineno, std::move(msg)}); };

    auto cols = split(view, opts.delimiter);
    for (auto& c : cols) c = trim(c);
    if (cols.size() != 4 && cols.size() != 5) {
      fail("expected 4 or 5 columns, got " + std::to_string(cols.size()));
      continue;
    }
    RawReview r;
    r.reviewer = std::string(cols[0]);
    r.product = std::string(cols[1]);
    if (r.reviewer.empty() || r.product.empty()) {
      fail("empty reviewer or product id");
      continue;
    }
    auto rating = parse_rating(cols[2]);
    if (!rating) {
      fail("unparseable rating '" + std::string(cols[2]) + "'");
      continue;
    }
    if (*rating < 1 || *rating > 5) {
      fail("rating " + std::to_string(*rating) + " outside [1,5]");
      continue;
    }
    r.rating = *rating;
    std::string_view date_col = cols.size() == 5 ? cols[4] : cols[3];
    auto date = parse_date(date_col);
    if (!date) {
      fail("unparseable date '" + std::string(date_col) + "'");
      continue;
    }
    r.date = *date;
    if (cols.size() == 5) {
      auto label = label_of(cols[3]);
      if (!label) {
        fail("unrecognised label '" + std::string(cols[3]) + "'");
        continue;
      }
      r.label = *label;
      result.label_column = true;
    }
    rows.push_back(std::move(r));
  }
  if (in.bad()) throw IoError("read error while parsing reviews");
  result.table = ReviewTable(std::move(rows));
  return result;
}

void write_reviews(std::ostream& out, const ReviewTable& table, const ParseOptions& opts) {
  const char d = opts.delimiter;
  if (opts.header) out << "reviewer_id" << d << "product_id" << d << "rating" << d << "label" << d << "date\n";
  for (const auto& r : table.reviews()) {
    out << table.name(r.reviewer) << d << table.name(r.product) << d << r.rating << d;
    if (r.label == Label::Fake && !opts.fake_labels.empty()) out << opts.fake_labels.front();
    if (r.label == Label::Genuine && !opts.genuine_labels.empty()) out << opts.genuine_labels.front();
    out << d << format_date(r.date) << '\n';
  }
}

// ---------------------------------------------------------------------------

ReviewTable dedupe(const ReviewTable& table, DedupPolicy policy) {
  const auto& reviews = table.reviews();
  std::vector<bool> keep(reviews.size(), false);
  for (std::uint32_t u = 0; u < table.reviewer_count(); ++u) {
    const auto& rows = table.by_reviewer(ReviewerId{u});
    // product -> winning row; rows are in input order
    std::unordered_map<std::uint32_t, std::size_t> winner;
    for (std::size_t row : rows) {
      auto [it, inserted] = winner.try_emplace(index(reviews[row].product), row);
      if (inserted) continue;
      const Date current = reviews[it->second].date;
      const Date candidate = reviews[row].date;
      bool replace = policy == DedupPolicy::KeepLatest ? candidate >= current : candidate < current;
      if (replace) it->second = row;
    }
    for (const auto& [product, row] : winner) keep[row] = true;
  }
  if (std::all_of(keep.begin(), keep.end(), [](bool k) { return k; })) return table;

  auto raw = table.to_raw();
  std::vector<RawReview> kept;
  kept.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (keep[i]) kept.push_back(std::move(raw[i]));
  }
  return ReviewTable(std::move(kept));
}

std::vector<ProductStats> product_stats(const ReviewTable& table) {
  std::vector<ProductStats> stats(table.product_count());
  for (std::uint32_t p = 0; p < table.product_count(); ++p) {
    const auto& rows = table.by_product(ProductId{p});
    double sum = 0.0;
    for (std::size_t row : rows) sum += table.reviews()[row].rating;
    stats[p].review_count = rows.size();
    stats[p].avg_rating = rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
  }
  return stats;
}

}  // namespace fgd
