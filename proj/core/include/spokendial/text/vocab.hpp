/**
 * Copyright 2026 The spokendial Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace spokendial::text {

class VocabError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Token to id map. Ids 0..3 are always the specials, in this order.
class Vocab {
 public:
  static constexpr std::size_t kBos = 0;   // <s>
  static constexpr std::size_t kPad = 1;   // <pad>
  static constexpr std::size_t kEos = 2;   // </s>
  static constexpr std::size_t kMask = 3;  // <mask>
  static constexpr std::size_t kNumSpecials = 4;

  Vocab();

  // Specials followed by `tokens` in first-seen order, duplicates dropped.
  static Vocab FromTokens(const std::vector<std::string>& tokens);

  // Returns the id of `token`, inserting it when new.
  std::size_t Add(const std::string& token);
  std::optional<std::size_t> Find(const std::string& token) const;
  // Throws VocabError naming the token when absent.
  std::size_t Id(const std::string& token) const;
  const std::string& Token(std::size_t id) const;
  std::size_t size() const { return tokens_.size(); }
  static bool IsSpecial(std::size_t id) { return id < kNumSpecials; }

  // Text format: a header line listing the specials, then one regular token
  // per line in id order.
  void Save(const std::filesystem::path& path) const;
  static Vocab Load(const std::filesystem::path& path);

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

const std::vector<std::string>& SpecialTokens();

}  // namespace spokendial::text
