#pragma once

#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "claimrank/corpus.hpp"
#include "claimrank/errors.hpp"

namespace claimrank {

// Translation-client contract: (text, source language, target language) → text.
using TranslateFn = std::function<std::string(const std::string&, const std::string&,
                                              const std::string&)>;

inline TranslateFn identity_translator() {
  return [](const std::string& text, const std::string&, const std::string&) { return text; };
}

// Reverses whitespace-delimited word order; applying it twice restores the
// original order (an involution up to whitespace normalization).
inline TranslateFn word_reversing_translator() {
  return [](const std::string& text, const std::string&, const std::string&) {
    std::istringstream in(text);
    std::vector<std::string> words;
    std::string w;
    while (in >> w) words.push_back(w);
    std::string out;
    for (std::size_t i = words.size(); i-- > 0;) {
      if (!out.empty()) out.push_back(' ');
      out += words[i];
    }
    return out;
  };
}

inline TranslateFn failing_translator(std::string reason = "translation backend unavailable") {
  return [reason = std::move(reason)](const std::string&, const std::string&,
                                      const std::string&) -> std::string {
    throw TranslatorError(reason);
  };
}

// Generic HTTP adapter. POSTs {"text", "source", "target"} as JSON to the
// endpoint and expects {"text": "..."} back. A bearer token is read from
// CLAIMRANK_TRANSLATE_TOKEN when present.
inline TranslateFn http_translator(const std::string& endpoint) {
  const std::size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("translate endpoint must be an http(s) URL");
  }
  const std::size_t path_start = endpoint.find('/', scheme + 3);
  const std::string base =
      path_start == std::string::npos ? endpoint : endpoint.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);

  return [base, path](const std::string& text, const std::string& src,
                      const std::string& dst) -> std::string {
    httplib::Client client(base);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(30, 0);
    httplib::Headers headers;
    if (const char* token = std::getenv("CLAIMRANK_TRANSLATE_TOKEN")) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    nlohmann::ordered_json body;
    body["text"] = text;
    body["source"] = src;
    body["target"] = dst;
    httplib::Result res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      throw TranslatorError("request to " + base + path + " failed: " +
                            httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw TranslatorError("translate endpoint returned status " +
                            std::to_string(res->status));
    }
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw TranslatorError(std::string("unparseable translate response: ") + e.what());
    }
    if (!parsed.is_object() || !parsed.contains("text") || !parsed["text"].is_string()) {
      throw TranslatorError("translate response has no text field");
    }
    return parsed["text"].get<std::string>();
  };
}

// Round-trips the tweet text through a pivot language. The label is
// preserved; the id gains a "#bt" suffix so provenance stays visible.
inline Tweet back_translate(const Tweet& tweet, const TranslateFn& translate,
                            const std::string& pivot, const std::string& source = "src") {
  Tweet out = tweet;
  out.text = translate(translate(tweet.text, source, pivot), pivot, source);
  out.tweet_id = tweet.tweet_id + "#bt";
  out.origin = Origin::backtranslated;
  return out;
}

}  // namespace claimrank
