#include "ctparse/synth.h"

#include <bit>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace ctparse {

namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> Words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<std::string> SplitOn(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

constexpr std::uint64_t Bit(int i) { return std::uint64_t{1} << i; }

}  // namespace

int Grammar::Id(std::string_view name) const {
  auto it = ids_.find(name);
  return it == ids_.end() ? -1 : it->second;
}

int Grammar::Intern(const std::string &name) {
  auto [it, inserted] = ids_.emplace(name, static_cast<int>(names_.size()));
  if (inserted) {
    names_.push_back(name);
    expansions_.emplace_back();
  }
  return it->second;
}

bool Grammar::IsTerminal(std::string_view word) const { return lexicon_.contains(word); }

Grammar Grammar::Parse(std::string_view text) {
  struct Line {
    std::size_t number;
    std::string lhs;
    std::string rhs;
    bool proform;
  };
  std::vector<Line> lines;
  std::size_t number = 0;
  for (const auto &raw : SplitOn(text, '\n')) {
    ++number;
    std::string line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    bool proform = false;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      proform = Trim(std::string_view(line).substr(hash + 1)) == "proform";
      line = Trim(std::string_view(line).substr(0, hash));
    }
    auto arrow = line.find("->");
    if (arrow == std::string::npos || line.find("->", arrow + 2) != std::string::npos) {
      throw GrammarError(fmt::format("grammar line {}: expected 'LHS -> RHS'", number));
    }
    auto lhs = Words(std::string_view(line).substr(0, arrow));
    if (lhs.size() != 1) {
      throw GrammarError(fmt::format("grammar line {}: left-hand side must be one symbol", number));
    }
    lines.push_back({number, lhs[0], line.substr(arrow + 2), proform});
  }
  if (lines.empty()) throw GrammarError("grammar has no rules");

  Grammar g;
  for (const auto &l : lines) {
    for (char c : l.lhs) {
      if (std::islower(static_cast<unsigned char>(c))) {
        throw GrammarError(fmt::format(
            "grammar line {}: nonterminal '{}' must not contain lowercase letters", l.number,
            l.lhs));
      }
    }
    g.Intern(l.lhs);
  }
  const std::size_t declared = g.names_.size();
  const auto is_nt = [&](const std::string &s) {
    int id = g.Id(s);
    return id >= 0 && static_cast<std::size_t>(id) < declared;
  };
  g.start_ = 0;

  std::set<std::string> terminals;
  const auto add_lexical = [&](int lhs, const std::string &word, bool sampled = true) {
    for (const auto &r : g.lexical_) {
      if (r.lhs == lhs && r.word == word) return;
    }
    if (sampled) g.expansions_[lhs].push_back(~static_cast<int>(g.lexical_.size()));
    g.lexical_.push_back({lhs, word});
    terminals.insert(word);
  };
  const auto preterminal = [&](const std::string &word) {
    std::string name = "T_";
    for (char c : word) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    int id = g.Intern(name);
    add_lexical(id, word);
    return id;
  };

  for (const auto &l : lines) {
    const int lhs = g.Id(l.lhs);
    auto alts = SplitOn(l.rhs, '|');
    if (l.proform && alts.size() != 1) {
      throw GrammarError(fmt::format("grammar line {}: a proform rule takes one alternative",
                                     l.number));
    }
    for (const auto &alt : alts) {
      auto syms = Words(alt);
      if (syms.size() == 3 && syms[0] == l.lhs && syms[1] == "and" && syms[2] == l.lhs) {
        g.coordinated_.push_back(lhs);
        terminals.insert("and");
        continue;
      }
      if (syms.empty() || syms.size() > 2) {
        throw GrammarError(fmt::format(
            "grammar line {}: right-hand side needs one or two symbols", l.number));
      }
      if (l.proform) {
        for (const auto &s : syms) {
          if (is_nt(s)) {
            throw GrammarError(fmt::format("grammar line {}: proform '{}' is a nonterminal",
                                           l.number, s));
          }
        }
        if (g.proforms_.contains(l.lhs)) {
          throw GrammarError(fmt::format("grammar line {}: {} already has a proform", l.number,
                                         l.lhs));
        }
        g.proforms_[l.lhs] = syms.size() == 1 ? syms[0] : syms[0] + " " + syms[1];
      }
      if (syms.size() == 1) {
        if (is_nt(syms[0])) {
          throw GrammarError(fmt::format(
              "grammar line {}: unary rule {} -> {} between nonterminals", l.number, l.lhs,
              syms[0]));
        }
        add_lexical(lhs, syms[0], !l.proform);
        continue;
      }
      const int left = is_nt(syms[0]) ? g.Id(syms[0]) : preterminal(syms[0]);
      const int right = is_nt(syms[1]) ? g.Id(syms[1]) : preterminal(syms[1]);
      if (!l.proform) g.expansions_[lhs].push_back(static_cast<int>(g.binary_.size()));
      g.binary_.push_back({lhs, left, right});
    }
  }
  for (std::size_t i = 0; i < g.names_.size(); ++i) {
    if (g.expansions_[i].empty()) {
      throw GrammarError(fmt::format("nonterminal {} has no rule usable for sampling",
                                     g.names_[i]));
    }
  }
  g.terminals_.assign(terminals.begin(), terminals.end());
  if (g.names_.size() > kMaxNonterminals) {
    throw GrammarError(fmt::format("grammar has {} nonterminals; at most {} are supported",
                                   g.names_.size(), kMaxNonterminals));
  }
  for (const auto &r : g.lexical_) g.lexicon_[r.word] |= Bit(r.lhs);
  if (!g.coordinated_.empty()) g.lexicon_.try_emplace("and", 0);
  g.Validate();
  return g;
}

Grammar Grammar::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open grammar file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

void Grammar::Validate() const {
  // Productive symbols by fixed point; binary rules are the only way to
  // combine, lexical rules seed the set.
  std::uint64_t productive = 0;
  for (const auto &r : lexical_) productive |= Bit(r.lhs);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto &r : binary_) {
      if (!(productive & Bit(r.lhs)) && (productive & Bit(r.left)) &&
          (productive & Bit(r.right))) {
        productive |= Bit(r.lhs);
        changed = true;
      }
    }
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!(productive & Bit(static_cast<int>(i)))) {
      throw GrammarError(fmt::format("nonterminal {} derives no terminal string", names_[i]));
    }
  }
  for (const auto &[nt, form] : proforms_) {
    std::vector<std::string> words;
    std::istringstream in(form);
    for (std::string w; in >> w;) words.push_back(w);
    // Which nonterminals derive exactly this string?
    const std::size_t n = words.size();
    std::vector<std::uint64_t> chart((n + 1) * (n + 1), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto it = lexicon_.find(words[i]);
      chart[i * (n + 1) + i + 1] = it == lexicon_.end() ? 0 : it->second;
    }
    for (std::size_t len = 2; len <= n; ++len) {
      for (std::size_t lo = 0; lo + len <= n; ++lo) {
        const std::size_t hi = lo + len;
        for (std::size_t k = lo + 1; k < hi; ++k) {
          for (const auto &r : binary_) {
            if ((chart[lo * (n + 1) + k] & Bit(r.left)) && (chart[k * (n + 1) + hi] & Bit(r.right))) {
              chart[lo * (n + 1) + hi] |= Bit(r.lhs);
            }
          }
        }
      }
    }
    const std::uint64_t mask = chart[n];
    if (std::popcount(mask) != 1) {
      throw GrammarError(fmt::format("proform '{}' of {} is derivable from {} nonterminals", form,
                                     nt, std::popcount(mask)));
    }
  }
}

bool Grammar::Recognizes(std::span<const std::string> words) const {
  const std::size_t n = words.size();
  if (n == 0) return false;
  const std::size_t w = n + 1;
  std::vector<std::uint64_t> chart(w * w, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = lexicon_.find(words[i]);
    if (it == lexicon_.end()) return false;
    chart[i * w + i + 1] = it->second;
  }
  for (std::size_t len = 2; len <= n; ++len) {
    for (std::size_t lo = 0; lo + len <= n; ++lo) {
      const std::size_t hi = lo + len;
      std::uint64_t mask = 0;
      for (std::size_t k = lo + 1; k < hi; ++k) {
        const std::uint64_t left = chart[lo * w + k];
        const std::uint64_t right = chart[k * w + hi];
        if (!left || !right) continue;
        for (const auto &r : binary_) {
          if ((left & Bit(r.left)) && (right & Bit(r.right))) mask |= Bit(r.lhs);
        }
      }
      for (int x : coordinated_) {
        for (std::size_t m = lo + 1; m + 1 < hi; ++m) {
          if (words[m] == "and" && (chart[lo * w + m] & Bit(x)) &&
              (chart[(m + 1) * w + hi] & Bit(x))) {
            mask |= Bit(x);
            break;
          }
        }
      }
      chart[lo * w + hi] = mask;
    }
  }
  return (chart[n] & Bit(start_)) != 0;
}

std::optional<Tree> Grammar::Expand(int nt, RandomSource &rng, std::size_t max_len,
                                    std::size_t &emitted, int depth) const {
  if (depth > 4 * static_cast<int>(max_len) + 16) return std::nullopt;
  const auto &alts = expansions_[nt];
  const int pick = alts[rng.Uniform(alts.size())];
  if (pick < 0) {
    if (++emitted > max_len) return std::nullopt;
    return Tree::Leaf(lexical_[~pick].word, names_[nt]);
  }
  const auto &r = binary_[pick];
  auto left = Expand(r.left, rng, max_len, emitted, depth + 1);
  if (!left) return std::nullopt;
  auto right = Expand(r.right, rng, max_len, emitted, depth + 1);
  if (!right) return std::nullopt;
  std::vector<Tree> kids;
  kids.push_back(std::move(*left));
  kids.push_back(std::move(*right));
  return Tree::Node(names_[nt], std::move(kids));
}

std::optional<Tree> Grammar::Sample(RandomSource &rng, std::size_t max_len) const {
  std::size_t emitted = 0;
  return Expand(start_, rng, max_len, emitted, 0);
}

DerivedCorpus SampleCorpus(const Grammar &grammar, std::size_t n, std::size_t max_len,
                           RandomSource &rng) {
  if (n == 0) throw InputError("sample size must be positive");
  if (max_len == 0) throw InputError("max_len must be positive");
  constexpr std::size_t kMaxRejections = 100000;
  DerivedCorpus out;
  std::size_t rejections = 0;
  while (out.sentences.size() < n) {
    auto tree = grammar.Sample(rng, max_len);
    if (!tree) {
      if (++rejections >= kMaxRejections) {
        throw GrammarError("grammar generates nothing under max_len");
      }
      continue;
    }
    rejections = 0;
    out.sentences.emplace_back(tree->Words());
    out.gold_trees.push_back(std::move(*tree));
  }
  return out;
}

double OracleJudge(const Grammar &grammar, const Sentence &sent) {
  return grammar.Recognizes(sent.tokens()) ? 1.0 : 0.0;
}

std::vector<double> GrammarOracleScorer::ScoreSentences(std::span<const Sentence> batch) const {
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto &s : batch) out.push_back(OracleJudge(grammar_, s));
  return out;
}

}  // namespace ctparse
