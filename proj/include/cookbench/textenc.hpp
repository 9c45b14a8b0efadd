#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

namespace cookbench::textenc {

// Lowercases and splits on whitespace and punctuation. Punctuation characters
// come out as their own tokens so sentence boundaries survive tokenization.
std::vector<std::string> tokenize(const std::string& text);

inline bool is_sentence_end(const std::string& token) {
    return token == "." || token == "?" || token == "!";
}

// Splits token stream into sentences; a sentence is a span ending at . ? !
// (or end of input). Used by Trajectory for the 11-sentence budget.
std::vector<std::vector<std::string>> split_sentences(const std::vector<std::string>& tokens);

class Vocab {
public:
    static constexpr std::int32_t kPad = 0;
    static constexpr std::int32_t kUnk = 1;

    Vocab() = default;

    // Builds the mapping from a set of known tokens; ids are assigned in
    // sorted token order so the vocabulary is deterministic.
    static Vocab build(const std::vector<std::string>& tokens);

    std::int32_t id(const std::string& token) const {
        auto it = ids_.find(token);
        return it == ids_.end() ? kUnk : it->second;
    }
    std::vector<std::int32_t> encode(const std::vector<std::string>& tokens) const;

    const std::string& token(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return tokens_.size(); }
    std::uint64_t content_hash() const;

    // line-per-token, written alongside checkpoints
    void save(const std::string& path) const;
    static Vocab load(const std::string& path);

private:
    std::map<std::string, std::int32_t> ids_;
    std::vector<std::string> tokens_;  // index = id; [0]=<pad>, [1]=<unk>
};

struct TrajectoryLimits {
    std::size_t max_sentences = 11;
    std::size_t max_tokens = 1000;
};

// Alternating history of system descriptions and player actions, kept within
// the sentence/token budgets. Trimming drops the oldest sentences first, so
// what remains is always a suffix of the full history.
class Trajectory {
public:
    explicit Trajectory(TrajectoryLimits limits = {}) : limits_(limits) {}

    void append_system(const std::string& observation);
    // An action counts as a single sentence regardless of its punctuation.
    void append_action(const std::string& action);
    void append_turn(const std::string& observation, const std::string& action) {
        append_action(action);
        append_system(observation);
    }

    std::size_t sentence_count() const { return sentences_.size(); }
    std::size_t token_count() const { return token_count_; }
    std::vector<std::string> tokens() const;
    std::vector<std::int32_t> token_ids(const Vocab& vocab) const;

    void clear() {
        sentences_.clear();
        token_count_ = 0;
    }

private:
    void push_sentence(std::vector<std::string> sentence);
    void trim();

    TrajectoryLimits limits_;
    std::deque<std::vector<std::string>> sentences_;
    std::size_t token_count_ = 0;
};

}  // namespace cookbench::textenc
