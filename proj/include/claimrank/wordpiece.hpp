#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "claimrank/errors.hpp"
#include "claimrank/text.hpp"

namespace claimrank {

// Vocabulary for greedy longest-match-first subword tokenization.
// Continuation pieces carry a "##" prefix in the file, one entry per line.
struct SubwordVocab {
  std::vector<std::string> entries;          // file order
  std::unordered_set<std::string> lookup;
  std::string unk_token = "[UNK]";
  std::size_t max_word_chars = 100;          // codepoints; longer words map to UNK

  bool contains(std::string_view piece) const {
    return lookup.find(std::string(piece)) != lookup.end();
  }
};

inline SubwordVocab load_vocab(std::istream& in) {
  SubwordVocab vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      // A blank final line is just a trailing newline.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw VocabError(line_no, "empty entry");
    }
    if (!vocab.lookup.insert(line).second) {
      throw VocabError(line_no, "duplicate entry '" + line + "'");
    }
    vocab.entries.push_back(line);
  }
  if (vocab.lookup.find(vocab.unk_token) == vocab.lookup.end()) {
    throw VocabError(line_no, "vocabulary has no " + vocab.unk_token + " entry");
  }
  return vocab;
}

inline SubwordVocab load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load_vocab(in);
}

inline SubwordVocab vocab_from_entries(std::vector<std::string> entries) {
  std::ostringstream joined;
  for (const std::string& e : entries) joined << e << '\n';
  std::istringstream in(joined.str());
  return load_vocab(in);
}

// Greedy longest-prefix segmentation of a single pre-token. Matches are taken
// on codepoint boundaries; any dead end or an over-long word yields one UNK.
inline std::vector<std::string> tokenize_word(const SubwordVocab& vocab, std::string_view word) {
  if (codepoint_count(word) > vocab.max_word_chars) return {vocab.unk_token};
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < word.size()) {
    // Candidate ends, longest first: every codepoint boundary after start.
    std::vector<std::size_t> ends;
    for (std::size_t i = start; i < word.size();) {
      decode_utf8(word, i);
      ends.push_back(i);
    }
    std::string matched;
    std::size_t matched_end = 0;
    for (std::size_t k = ends.size(); k-- > 0;) {
      std::string piece;
      if (start > 0) piece = "##";
      piece.append(word.substr(start, ends[k] - start));
      if (vocab.contains(piece)) {
        matched = std::move(piece);
        matched_end = ends[k];
        break;
      }
    }
    if (matched.empty()) return {vocab.unk_token};
    pieces.push_back(std::move(matched));
    start = matched_end;
  }
  return pieces;
}

inline std::vector<std::string> tokenize_text(const SubwordVocab& vocab, std::string_view text,
                                              bool lowercase = false) {
  std::string folded;
  if (lowercase) {
    folded = fold_case(text);
    text = folded;
  }
  std::vector<std::string> out;
  for (const std::string& word : pretokenize(text)) {
    for (std::string& piece : tokenize_word(vocab, word)) {
      out.push_back(std::move(piece));
    }
  }
  return out;
}

struct UnkReport {
  std::size_t total_pieces = 0;
  std::size_t unk_pieces = 0;

  double percent() const {
    return total_pieces == 0
               ? 0.0
               : 100.0 * static_cast<double>(unk_pieces) / static_cast<double>(total_pieces);
  }
};

template <typename TweetRange>
UnkReport unk_report(const SubwordVocab& vocab, const TweetRange& tweets,
                     bool lowercase = false) {
  UnkReport report;
  for (const auto& tweet : tweets) {
    for (const std::string& piece : tokenize_text(vocab, tweet.text, lowercase)) {
      ++report.total_pieces;
      if (piece == vocab.unk_token) ++report.unk_pieces;
    }
  }
  return report;
}

inline std::string unk_report_tsv(const UnkReport& r) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", r.percent());
  std::ostringstream out;
  out << "total\tunk\tpercent\n"
      << r.total_pieces << '\t' << r.unk_pieces << '\t' << buf << '\n';
  return out.str();
}

}  // namespace claimrank
