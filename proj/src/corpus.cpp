#include "ldntag/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "ldntag/util.hpp"

namespace ldntag {

TagSet::TagSet(std::vector<std::string> categories) : names_(std::move(categories)) {
  if (names_.empty()) throw std::runtime_error("tag set is empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw std::runtime_error("tag set contains an empty category name");
    if (n == "O") throw std::runtime_error("'O' is reserved and cannot be a category name");
    if (n.find_first_of(" \t\r\n") != std::string::npos)
      throw std::runtime_error("category name contains whitespace: '" + n + "'");
    if (!seen.insert(n).second)
      throw std::runtime_error("duplicate category name: '" + n + "'");
  }
}

TagSet TagSet::wnut17() {
  return TagSet({"corporation", "creative-work", "group", "location", "person", "product"});
}

TagSet TagSet::from_file(const std::string& path) {
  std::vector<std::string> names;
  const std::string text = read_text_file(path);
  for (std::string_view line : split(text, '\n')) {
    std::string_view t = trim(line);
    if (!t.empty()) names.emplace_back(t);
  }
  if (names.empty()) throw std::runtime_error("tag-set file has no categories: " + path);
  return TagSet(std::move(names));
}

std::optional<std::size_t> TagSet::find(std::string_view category) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == category) return i;
  return std::nullopt;
}

std::string tag_to_string(const BioTag& tag, const TagSet& tagset) {
  switch (tag.kind) {
    case BioKind::O: return "O";
    case BioKind::B: return "B-" + tagset.name(tag.category);
    case BioKind::I: return "I-" + tagset.name(tag.category);
  }
  throw std::logic_error("bad BioKind");
}

BioTag tag_from_string(std::string_view text, const TagSet& tagset) {
  if (text == "O") return BioTag::o();
  if (text.size() > 2 && (text[0] == 'B' || text[0] == 'I') && text[1] == '-') {
    std::string_view name = text.substr(2);
    auto cat = tagset.find(name);
    if (!cat) throw std::runtime_error("unknown entity category '" + std::string(name) + "'");
    return text[0] == 'B' ? BioTag::b(*cat) : BioTag::i(*cat);
  }
  throw std::runtime_error("malformed tag '" + std::string(text) + "'");
}

Token make_token(std::string text, BioTag tag) {
  if (text.empty()) throw std::runtime_error("empty token");
  std::string norm = normalize_token(text);
  return Token{std::move(text), std::move(norm), tag};
}

std::string normalize_token(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c >= 'A' && c <= 'Z')
      out.push_back(static_cast<char>(c - 'A' + 'a'));
    else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))
      out.push_back(c);
  }
  return out;
}

namespace {

// Lines of `text`, with trailing '\r' stripped; the artifact of a final
// newline (one empty trailing element) is dropped.
std::vector<std::string_view> corpus_lines(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& line : lines)
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return lines;
}

Dataset parse_lines(std::string_view text, const TagSet& tagset, bool tagged) {
  Dataset d{{}, tagset};
  std::vector<Token> current;
  auto flush = [&] {
    if (!current.empty()) {
      d.sentences.push_back(Sentence{std::move(current), d.sentences.size()});
      current.clear();
    }
  };

  std::size_t line_no = 0;
  for (std::string_view line : corpus_lines(text)) {
    ++line_no;
    if (line.empty()) {
      flush();
      continue;
    }
    auto fields = split(line, '\t');
    std::string err_prefix = "line " + std::to_string(line_no) + ": ";
    if (tagged && fields.size() != 2)
      throw std::runtime_error(err_prefix + "expected token<TAB>tag, got " +
                               std::to_string(fields.size()) + " field(s)");
    if (fields[0].empty()) throw std::runtime_error(err_prefix + "empty token");
    BioTag tag = BioTag::o();
    if (tagged) {
      try {
        tag = tag_from_string(fields[1], tagset);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(err_prefix + e.what());
      }
    }
    current.push_back(make_token(std::string(fields[0]), tag));
  }
  flush();
  if (d.sentences.empty()) throw std::runtime_error("no sentences in corpus input");
  return d;
}

}  // namespace

Dataset parse_conll(std::string_view text, const TagSet& tagset) {
  return parse_lines(text, tagset, /*tagged=*/true);
}

Dataset parse_untagged(std::string_view text, const TagSet& tagset) {
  return parse_lines(text, tagset, /*tagged=*/false);
}

std::string to_conll(const Dataset& d) {
  std::string out;
  for (const Sentence& s : d.sentences) {
    for (const Token& t : s.tokens) {
      out += t.text;
      out += '\t';
      out += tag_to_string(t.tag, d.tagset);
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<EntitySpan> extract_spans(const std::vector<BioTag>& tags,
                                      std::size_t sentence_id,
                                      const std::vector<Token>& tokens) {
  if (tags.size() != tokens.size())
    throw std::runtime_error("tag/token length mismatch in extract_spans");
  std::vector<EntitySpan> spans;
  bool open = false;
  std::size_t start = 0, cat = 0;
  auto close = [&](std::size_t end) {
    if (!open) return;
    std::string surface = tokens[start].text;
    for (std::size_t i = start + 1; i < end; ++i) {
      surface += ' ';
      surface += tokens[i].text;
    }
    spans.push_back(EntitySpan{sentence_id, start, end, cat, std::move(surface)});
    open = false;
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const BioTag& t = tags[i];
    if (t.kind == BioKind::O) {
      close(i);
    } else if (t.kind == BioKind::B || !open || cat != t.category) {
      close(i);
      open = true;
      start = i;
      cat = t.category;
    }
    // I-X continuing an open span of the same category: nothing to do
  }
  close(tags.size());
  return spans;
}

std::vector<EntitySpan> extract_spans(const Sentence& s) {
  std::vector<BioTag> tags;
  tags.reserve(s.tokens.size());
  for (const Token& t : s.tokens) tags.push_back(t.tag);
  return extract_spans(tags, s.id, s.tokens);
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& d, double train_fraction,
                                          std::uint64_t seed) {
  const std::size_t n = d.sentences.size();
  if (n < 2) throw std::runtime_error("need at least 2 sentences to split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::runtime_error("train fraction must be in (0, 1)");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  shuffle_indices(order, rng);

  std::size_t train_count = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * train_fraction));
  train_count = std::clamp<std::size_t>(train_count, 1, n - 1);

  std::vector<std::size_t> train_ids(order.begin(),
                                     order.begin() + static_cast<std::ptrdiff_t>(train_count));
  std::vector<std::size_t> test_ids(order.begin() + static_cast<std::ptrdiff_t>(train_count),
                                    order.end());
  std::sort(train_ids.begin(), train_ids.end());
  std::sort(test_ids.begin(), test_ids.end());

  auto take = [&](const std::vector<std::size_t>& ids) {
    Dataset part{{}, d.tagset};
    part.sentences.reserve(ids.size());
    for (std::size_t id : ids) {
      Sentence s = d.sentences[id];
      s.id = part.sentences.size();
      part.sentences.push_back(std::move(s));
    }
    return part;
  };
  return {take(train_ids), take(test_ids)};
}

}  // namespace ldntag
