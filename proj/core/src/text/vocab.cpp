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

#include "spokendial/text/vocab.hpp"

#include <fstream>

namespace spokendial::text {

namespace {
constexpr const char* kHeaderTag = "#specials";
}  // namespace

const std::vector<std::string>& SpecialTokens() {
  static const std::vector<std::string> kSpecials = {"<s>", "<pad>", "</s>", "<mask>"};
  return kSpecials;
}

Vocab::Vocab() {
  for (const auto& s : SpecialTokens()) Add(s);
}

Vocab Vocab::FromTokens(const std::vector<std::string>& tokens) {
  Vocab v;
  for (const auto& t : tokens) v.Add(t);
  return v;
}

std::size_t Vocab::Add(const std::string& token) {
  if (token.empty()) throw VocabError("Vocab: empty token");
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  const std::size_t id = tokens_.size();
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

std::optional<std::size_t> Vocab::Find(const std::string& token) const {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  return std::nullopt;
}

std::size_t Vocab::Id(const std::string& token) const {
  if (auto id = Find(token)) return *id;
  throw VocabError("out-of-vocabulary token '" + token + "'");
}

const std::string& Vocab::Token(std::size_t id) const {
  if (id >= tokens_.size()) {
    throw VocabError("token id " + std::to_string(id) + " out of range for vocab of size " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

void Vocab::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  out << kHeaderTag;
  for (const auto& s : SpecialTokens()) out << ' ' << s;
  out << '\n';
  for (std::size_t i = kNumSpecials; i < tokens_.size(); ++i) out << tokens_[i] << '\n';
  if (!out) throw VocabError("cannot write vocab " + path.string());
}

Vocab Vocab::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw VocabError("cannot open vocab " + path.string());
  std::string line;
  std::getline(in, line);
  std::string expected = kHeaderTag;
  for (const auto& s : SpecialTokens()) expected += ' ' + s;
  if (line != expected) {
    throw VocabError("vocab " + path.string() + ": bad specials header '" + line + "'");
  }
  Vocab v;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (v.Find(line)) {
      throw VocabError("vocab " + path.string() + ": duplicate token '" + line + "' on line " +
                       std::to_string(line_no));
    }
    v.Add(line);
  }
  return v;
}

}  // namespace spokendial::text
