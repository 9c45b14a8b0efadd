#include "cookbench/textenc.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "cookbench/rng.hpp"

namespace cookbench::textenc {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    };
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isspace(c)) {
            flush();
        } else if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (c == '\'' || c == '-') {
            // keep contractions and hyphenated words together
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
            out.push_back(std::string(1, static_cast<char>(c)));
        }
    }
    flush();
    return out;
}

std::vector<std::vector<std::string>> split_sentences(const std::vector<std::string>& tokens) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> cur;
    for (const auto& t : tokens) {
        cur.push_back(t);
        if (is_sentence_end(t)) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

Vocab Vocab::build(const std::vector<std::string>& tokens) {
    Vocab v;
    v.tokens_.push_back("<pad>");
    v.tokens_.push_back("<unk>");
    std::vector<std::string> uniq(tokens);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (const auto& t : uniq) {
        v.ids_.emplace(t, static_cast<std::int32_t>(v.tokens_.size()));
        v.tokens_.push_back(t);
    }
    return v;
}

std::vector<std::int32_t> Vocab::encode(const std::vector<std::string>& tokens) const {
    std::vector<std::int32_t> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(id(t));
    return out;
}

std::uint64_t Vocab::content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& t : tokens_) {
        h = mix_seed(h ^ fnv1a64(t));
    }
    return h;
}

void Vocab::save(const std::string& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write vocab file: " + path);
    for (const auto& t : tokens_) f << t << "\n";
}

Vocab Vocab::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read vocab file: " + path);
    Vocab v;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (v.tokens_.size() >= 2) v.ids_.emplace(line, static_cast<std::int32_t>(v.tokens_.size()));
        v.tokens_.push_back(line);
    }
    if (v.tokens_.size() < 2 || v.tokens_[0] != "<pad>" || v.tokens_[1] != "<unk>") {
        throw std::runtime_error("corrupt vocab file: " + path);
    }
    return v;
}

void Trajectory::append_system(const std::string& observation) {
    for (auto& s : split_sentences(tokenize(observation))) push_sentence(std::move(s));
}

void Trajectory::append_action(const std::string& action) {
    auto toks = tokenize(action);
    if (!toks.empty()) push_sentence(std::move(toks));
}

void Trajectory::push_sentence(std::vector<std::string> sentence) {
    token_count_ += sentence.size();
    sentences_.push_back(std::move(sentence));
    trim();
}

void Trajectory::trim() {
    // sentence budget first, then token budget
    while (sentences_.size() > limits_.max_sentences) {
        token_count_ -= sentences_.front().size();
        sentences_.pop_front();
    }
    while (token_count_ > limits_.max_tokens && sentences_.size() > 1) {
        token_count_ -= sentences_.front().size();
        sentences_.pop_front();
    }
    // a single oversized sentence is cut down to its trailing tokens
    if (token_count_ > limits_.max_tokens && sentences_.size() == 1) {
        auto& s = sentences_.front();
        s.erase(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(s.size() - limits_.max_tokens));
        token_count_ = s.size();
    }
}

std::vector<std::string> Trajectory::tokens() const {
    std::vector<std::string> out;
    out.reserve(token_count_);
    for (const auto& s : sentences_) out.insert(out.end(), s.begin(), s.end());
    return out;
}

std::vector<std::int32_t> Trajectory::token_ids(const Vocab& vocab) const {
    return vocab.encode(tokens());
}

}  // namespace cookbench::textenc
