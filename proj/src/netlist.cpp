#include "tsvf/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace tsvf {

std::string_view to_string(ParseErrorKind kind) {
    switch (kind) {
        case ParseErrorKind::UnknownKeyword: return "unknown-keyword";
        case ParseErrorKind::UnknownRail: return "unknown-rail";
        case ParseErrorKind::Arity: return "arity";
        case ParseErrorKind::NonNormalized: return "non-normalized";
        case ParseErrorKind::Duplicate: return "duplicate";
        case ParseErrorKind::MissingSection: return "missing-section";
    }
    return "?";
}

namespace {

constexpr int kMaxSteps = 4096;
constexpr int kMaxBranches = 4096;

struct Token {
    std::string text; // quoted tokens keep their quotes
    std::size_t col = 0; // 1-based

    bool quoted() const { return text.size() >= 2 && text.front() == '"' && text.back() == '"'; }
    std::string unquoted() const { return quoted() ? text.substr(1, text.size() - 2) : text; }
};

struct Line {
    std::size_t number = 0; // 1-based
    std::string text;       // raw, without newline
    std::vector<Token> tokens;
};

std::vector<Line> split_lines(std::string_view input) {
    std::vector<Line> lines;
    std::size_t start = 0;
    std::size_t lineno = 1;
    while (start <= input.size()) {
        std::size_t end = input.find('\n', start);
        std::string_view raw = end == std::string_view::npos
                                   ? input.substr(start)
                                   : input.substr(start, end - start);
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        lines.push_back({lineno, std::string(raw), {}});
        if (end == std::string_view::npos) break;
        start = end + 1;
        ++lineno;
    }
    return lines;
}

void tokenize(Line& line) {
    const std::string& s = line.text;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char ch = static_cast<unsigned char>(s[i]);
        if (std::isspace(ch)) {
            ++i;
            continue;
        }
        if (s[i] == '#') break; // comment to end of line (outside quotes)
        std::size_t begin = i;
        if (s[i] == '"') {
            ++i;
            while (i < s.size() && s[i] != '"') ++i;
            if (i < s.size()) ++i; // closing quote
        } else {
            while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) &&
                   s[i] != '#') {
                ++i;
            }
        }
        line.tokens.push_back({s.substr(begin, i - begin), begin + 1});
    }
}

bool valid_name(std::string_view t) {
    if (t.empty()) return false;
    return std::all_of(t.begin(), t.end(), [](unsigned char ch) {
        return std::isalnum(ch) != 0 || ch == '_';
    });
}

std::optional<double> parse_plain(std::string_view t) {
    if (t.empty()) return std::nullopt;
    if (t == "inf" || t == "nan" || t == "-inf" || t == "-nan" || t == "+inf" || t == "+nan") {
        return std::nullopt;
    }
    double value = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

/// Decimal literal or sqrt(p/q) sugar, optionally negated.
std::optional<double> parse_real(std::string_view t) {
    double sign = 1.0;
    if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
        if (t[0] == '-') sign = -1.0;
        t.remove_prefix(1);
    }
    if (t.rfind("sqrt(", 0) == 0) {
        if (t.size() < 7 || t.back() != ')') return std::nullopt;
        std::string_view inner = t.substr(5, t.size() - 6);
        std::string_view p_text = inner;
        std::string_view q_text;
        if (auto slash = inner.find('/'); slash != std::string_view::npos) {
            p_text = inner.substr(0, slash);
            q_text = inner.substr(slash + 1);
        }
        auto p = parse_plain(p_text);
        if (!p || *p < 0.0) return std::nullopt;
        double q = 1.0;
        if (!q_text.empty() || inner.find('/') != std::string_view::npos) {
            auto parsed_q = parse_plain(q_text);
            if (!parsed_q || *parsed_q <= 0.0) return std::nullopt;
            q = *parsed_q;
        }
        return sign * std::sqrt(*p / q);
    }
    auto v = parse_plain(t);
    if (!v) return std::nullopt;
    return sign * *v;
}

/// <re>, <re>+<im>i, <re>-<im>i, or <im>i.
std::optional<Amplitude> parse_amplitude(std::string_view t) {
    if (t.empty()) return std::nullopt;
    std::size_t split = std::string_view::npos;
    for (std::size_t i = 1; i < t.size(); ++i) {
        if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E' &&
            t[i - 1] != '(' && t[i - 1] != '/') {
            split = i; // keep the last candidate so "sqrt(..)+..i" splits after the sugar
        }
    }
    if (t.back() == 'i') {
        std::string_view im_text;
        std::string_view re_text;
        if (split == std::string_view::npos) {
            im_text = t.substr(0, t.size() - 1);
        } else {
            re_text = t.substr(0, split);
            im_text = t.substr(split, t.size() - split - 1);
        }
        auto im = parse_real(im_text);
        if (!im) return std::nullopt;
        double re = 0.0;
        if (!re_text.empty()) {
            auto parsed = parse_real(re_text);
            if (!parsed) return std::nullopt;
            re = *parsed;
        }
        return Amplitude(re, *im);
    }
    auto re = parse_real(t);
    if (!re) return std::nullopt;
    return Amplitude(*re, 0.0);
}

std::optional<int> parse_int(std::string_view t) {
    if (t.empty()) return std::nullopt;
    int value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
    return value;
}

struct RailAt {
    std::optional<std::string> rail;
    int slice = 0;
};

std::optional<RailAt> parse_rail_at(std::string_view t) {
    auto at = t.find('@');
    if (at == std::string_view::npos) return std::nullopt;
    RailAt out;
    std::string_view rail = t.substr(0, at);
    if (!rail.empty()) {
        if (!valid_name(rail)) return std::nullopt;
        out.rail = std::string(rail);
    }
    auto slice = parse_int(t.substr(at + 1));
    if (!slice || *slice < 0 || *slice > kMaxSteps) return std::nullopt;
    out.slice = *slice;
    return out;
}

struct PendingSliceCheck {
    std::size_t line_index = 0;
    Token token;
    int slice = 0;
};

class NetlistParser {
public:
    explicit NetlistParser(std::string_view input) : lines_(split_lines(input)) {
        for (auto& line : lines_) tokenize(line);
    }

    ParseResult run() {
        // Rails and probe first so later directives can resolve names.
        for (const Line& line : lines_) {
            if (!line.tokens.empty() && line.tokens[0].text == "rails") handle_rails(line);
        }
        for (const Line& line : lines_) {
            if (line.tokens.empty()) continue;
            const std::string& kw = line.tokens[0].text;
            if (kw == "rails") continue;
            if (kw == "scenario") handle_scenario(line);
            else if (kw == "step") handle_step(line);
            else if (kw == "preselect") handle_selection(line, pre_, pre_seen_);
            else if (kw == "postselect") handle_selection(line, post_, post_seen_);
            else if (kw == "probe") handle_probe(line);
            else if (kw == "detector") handle_detector(line);
            else if (kw == "label") handle_label(line);
            else if (kw == "expect") handle_expect(line);
            else error(line, line.tokens[0], ParseErrorKind::UnknownKeyword,
                       "unknown directive '" + line.tokens[0].text + "'");
        }
        finalize();

        ParseResult result;
        result.errors = std::move(errors_);
        if (result.errors.empty()) result.scenario = build();
        return result;
    }

private:
    std::vector<Line> lines_;
    std::vector<ParseError> errors_;

    bool rails_seen_ = false;
    std::vector<std::string> rails_;
    std::string name_;
    bool name_seen_ = false;
    std::map<int, std::vector<Element>> steps_;
    int max_step_ = 0;
    std::map<std::string, Amplitude> pre_, post_;
    bool pre_seen_ = false, post_seen_ = false;
    ProbeConfig probe_;
    bool probe_seen_ = false;
    std::map<std::string, std::string> detectors_;
    std::vector<SliceLabel> labels_;
    std::vector<Expectation> expects_;
    std::vector<PendingSliceCheck> slice_checks_;

    void error(const Line& line, const Token& tok, ParseErrorKind kind, std::string message) {
        error_at(line, tok.col, tok.text.size(), kind, std::move(message));
    }

    /// For errors about a sub-token (a rail inside "A=1", say) the span
    /// covers exactly the characters the message quotes.
    void error_at(const Line& line, std::size_t col, std::size_t len, ParseErrorKind kind,
                  std::string message) {
        SourceSpan span;
        span.line = line.number;
        span.col_begin = col;
        span.col_end = col + len;
        span.text = line.text;
        errors_.push_back({std::move(span), kind, std::move(message)});
    }

    void whole_input_error(ParseErrorKind kind, std::string message) {
        errors_.push_back({SourceSpan{}, kind, std::move(message)});
    }

    bool rail_known(const std::string& rail) const {
        return std::find(rails_.begin(), rails_.end(), rail) != rails_.end();
    }

    /// Reports unknown rails only when a rails section exists; otherwise the
    /// missing-section error already covers the file. `offset` positions the
    /// rail inside a compound token such as "A=1" or "A@3".
    bool check_rail(const Line& line, const Token& tok, const std::string& rail,
                    std::size_t offset = 0) {
        if (!valid_name(rail)) {
            error(line, tok, ParseErrorKind::Arity, "invalid rail name in '" + tok.text + "'");
            return false;
        }
        if (rails_seen_ && !rail_known(rail)) {
            error_at(line, tok.col + offset, rail.size(), ParseErrorKind::UnknownRail,
                     "unknown rail '" + rail + "'");
            return false;
        }
        return rails_seen_;
    }

    void handle_rails(const Line& line) {
        if (rails_seen_) {
            error(line, line.tokens[0], ParseErrorKind::Duplicate, "duplicate 'rails' directive");
            return;
        }
        if (line.tokens.size() < 2) {
            error(line, line.tokens[0], ParseErrorKind::Arity,
                  "'rails' needs at least one label");
            return;
        }
        rails_seen_ = true;
        for (std::size_t i = 1; i < line.tokens.size(); ++i) {
            const Token& tok = line.tokens[i];
            if (!valid_name(tok.text)) {
                error(line, tok, ParseErrorKind::Arity, "invalid rail name '" + tok.text + "'");
                continue;
            }
            if (rail_known(tok.text)) {
                error(line, tok, ParseErrorKind::Duplicate, "duplicate rail '" + tok.text + "'");
                continue;
            }
            rails_.push_back(tok.text);
        }
    }

    void handle_scenario(const Line& line) {
        if (name_seen_) {
            error(line, line.tokens[0], ParseErrorKind::Duplicate,
                  "duplicate 'scenario' directive");
            return;
        }
        if (line.tokens.size() != 2 || !valid_name(line.tokens[1].text)) {
            error(line, line.tokens.back(), ParseErrorKind::Arity,
                  "'scenario' needs one name, got '" + line.tokens.back().text + "'");
            return;
        }
        name_seen_ = true;
        name_ = line.tokens[1].text;
    }

    std::optional<std::pair<std::string, Amplitude>> parse_assignment(const Line& line,
                                                                      const Token& tok) {
        auto eq = tok.text.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 >= tok.text.size()) {
            error(line, tok, ParseErrorKind::Arity,
                  "expected <rail>=<amplitude>, got '" + tok.text + "'");
            return std::nullopt;
        }
        std::string rail = tok.text.substr(0, eq);
        check_rail(line, tok, rail, 0);
        auto amp = parse_amplitude(std::string_view(tok.text).substr(eq + 1));
        if (!amp) {
            error(line, tok, ParseErrorKind::Arity, "bad amplitude in '" + tok.text + "'");
            return std::nullopt;
        }
        return std::make_pair(std::move(rail), *amp);
    }

    void handle_selection(const Line& line, std::map<std::string, Amplitude>& target,
                          bool& seen) {
        if (seen) {
            error(line, line.tokens[0], ParseErrorKind::Duplicate,
                  "duplicate '" + line.tokens[0].text + "' directive");
            return;
        }
        seen = true;
        for (std::size_t i = 1; i < line.tokens.size(); ++i) {
            auto assignment = parse_assignment(line, line.tokens[i]);
            if (!assignment) continue;
            if (!target.emplace(assignment->first, assignment->second).second) {
                error_at(line, line.tokens[i].col, assignment->first.size(),
                         ParseErrorKind::Duplicate,
                         "rail '" + assignment->first + "' assigned twice");
            }
        }
    }

    std::optional<double> parse_keyed(const Line& line, const Token& tok, std::string_view key) {
        std::string prefix = std::string(key) + "=";
        if (tok.text.rfind(prefix, 0) != 0) {
            error(line, tok, ParseErrorKind::Arity,
                  "expected " + prefix + "<value>, got '" + tok.text + "'");
            return std::nullopt;
        }
        auto v = parse_real(std::string_view(tok.text).substr(prefix.size()));
        if (!v) {
            error(line, tok, ParseErrorKind::Arity, "bad number in '" + tok.text + "'");
            return std::nullopt;
        }
        return v;
    }

    void handle_step(const Line& line) {
        const auto& toks = line.tokens;
        std::size_t i = 1;
        if (i >= toks.size()) {
            error(line, toks[0], ParseErrorKind::Arity, "'step' needs a number and an element");
            return;
        }
        std::string num_text = toks[i].text;
        bool colon = false;
        if (!num_text.empty() && num_text.back() == ':') {
            num_text.pop_back();
            colon = true;
        }
        auto num = parse_int(num_text);
        if (!num || *num < 1 || *num > kMaxSteps) {
            error(line, toks[i], ParseErrorKind::Arity,
                  "bad step number '" + toks[i].text + "'");
            return;
        }
        ++i;
        if (!colon) {
            if (i < toks.size() && toks[i].text == ":") {
                ++i;
            } else {
                error(line, toks[i - 1], ParseErrorKind::Arity,
                      "expected ':' after step number '" + toks[i - 1].text + "'");
                return;
            }
        }
        if (i >= toks.size()) {
            error(line, toks[0], ParseErrorKind::Arity, "'step' line has no element");
            return;
        }

        const Token& kind_tok = toks[i];
        const std::string& kind = kind_tok.text;
        ++i;
        auto remaining = [&]() { return toks.size() - i; };
        auto too_many = [&](std::size_t expect) {
            if (remaining() > expect) {
                error(line, toks[i + expect], ParseErrorKind::Arity,
                      "unexpected token '" + toks[i + expect].text + "'");
                return true;
            }
            return false;
        };

        Element e;
        if (kind == "bs") {
            if (remaining() < 3) {
                error(line, kind_tok, ParseErrorKind::Arity,
                      "'bs' needs two rails and t=<value>");
                return;
            }
            e.kind = ElementKind::Mixer;
            e.rail_a = toks[i].text;
            e.rail_b = toks[i + 1].text;
            check_rail(line, toks[i], e.rail_a);
            check_rail(line, toks[i + 1], e.rail_b);
            if (e.rail_a == e.rail_b) {
                error(line, toks[i + 1], ParseErrorKind::Duplicate,
                      "mixer uses rail '" + e.rail_b + "' twice");
            }
            auto t = parse_keyed(line, toks[i + 2], "t");
            if (!t) return;
            if (*t < 0.0 || *t > 1.0) {
                error(line, toks[i + 2], ParseErrorKind::NonNormalized,
                      "mixer transmission '" + toks[i + 2].text + "' outside [0, 1]");
                return;
            }
            e.transmission = *t;
            if (remaining() >= 4) {
                auto phase = parse_keyed(line, toks[i + 3], "phase");
                if (!phase) return;
                e.phase = *phase;
                if (too_many(4)) return;
            } else if (too_many(3)) {
                return;
            }
        } else if (kind == "phase") {
            if (remaining() < 2) {
                error(line, kind_tok, ParseErrorKind::Arity,
                      "'phase' needs a rail and an angle");
                return;
            }
            e.kind = ElementKind::Phase;
            e.rail_a = toks[i].text;
            check_rail(line, toks[i], e.rail_a);
            auto angle = parse_real(toks[i + 1].text);
            if (!angle) {
                error(line, toks[i + 1], ParseErrorKind::Arity,
                      "bad angle '" + toks[i + 1].text + "'");
                return;
            }
            e.phase = *angle;
            if (too_many(2)) return;
        } else if (kind == "swap") {
            if (remaining() < 2) {
                error(line, kind_tok, ParseErrorKind::Arity, "'swap' needs two rails");
                return;
            }
            e.kind = ElementKind::Swap;
            e.rail_a = toks[i].text;
            e.rail_b = toks[i + 1].text;
            check_rail(line, toks[i], e.rail_a);
            check_rail(line, toks[i + 1], e.rail_b);
            if (e.rail_a == e.rail_b) {
                error(line, toks[i + 1], ParseErrorKind::Duplicate,
                      "swap uses rail '" + e.rail_b + "' twice");
            }
            if (too_many(2)) return;
        } else if (kind == "absorb") {
            if (remaining() < 1) {
                error(line, kind_tok, ParseErrorKind::Arity, "'absorb' needs a rail");
                return;
            }
            e.kind = ElementKind::Absorber;
            e.rail_a = toks[i].text;
            check_rail(line, toks[i], e.rail_a);
            if (too_many(1)) return;
        } else if (kind == "route") {
            if (remaining() < 3) {
                error(line, kind_tok, ParseErrorKind::Arity,
                      "'route' needs a rail, probe=<branch> and at=<slice>");
                return;
            }
            e.kind = ElementKind::Router;
            e.rail_a = toks[i].text;
            check_rail(line, toks[i], e.rail_a);
            auto branch = parse_keyed(line, toks[i + 1], "probe");
            auto at = parse_keyed(line, toks[i + 2], "at");
            if (!branch || !at) return;
            if (*branch < 1.0 || *branch > kMaxBranches ||
                *branch != std::floor(*branch)) {
                error(line, toks[i + 1], ParseErrorKind::Arity,
                      "bad probe branch '" + toks[i + 1].text + "'");
                return;
            }
            if (*at < 0.0 || *at > kMaxSteps || *at != std::floor(*at)) {
                error(line, toks[i + 2], ParseErrorKind::Arity,
                      "bad slice '" + toks[i + 2].text + "'");
                return;
            }
            e.probe_branch = static_cast<int>(*branch);
            e.observed_slice = static_cast<int>(*at);
            if (e.observed_slice != *num - 1) {
                error(line, toks[i + 2], ParseErrorKind::Arity,
                      "router in step " + std::to_string(*num) + " must observe slice " +
                          std::to_string(*num - 1) + ", got '" + toks[i + 2].text + "'");
                return;
            }
            if (too_many(3)) return;
        } else {
            error(line, kind_tok, ParseErrorKind::UnknownKeyword,
                  "unknown element '" + kind + "'");
            return;
        }
        steps_[*num].push_back(std::move(e));
        max_step_ = std::max(max_step_, *num);
    }

    void handle_probe(const Line& line) {
        if (probe_seen_) {
            error(line, line.tokens[0], ParseErrorKind::Duplicate, "duplicate 'probe' directive");
            return;
        }
        const auto& toks = line.tokens;
        if (toks.size() < 4) {
            error(line, toks[0], ParseErrorKind::Arity,
                  "'probe' needs the form: probe branches <k> amps <a1..ak>");
            return;
        }
        if (toks[1].text != "branches") {
            error(line, toks[1], ParseErrorKind::Arity,
                  "expected 'branches', got '" + toks[1].text + "'");
            return;
        }
        if (toks[3].text != "amps") {
            error(line, toks[3], ParseErrorKind::Arity,
                  "expected 'amps', got '" + toks[3].text + "'");
            return;
        }
        auto k = parse_int(toks[2].text);
        if (!k || *k < 1 || *k > kMaxBranches) {
            error(line, toks[2], ParseErrorKind::Arity,
                  "bad branch count '" + toks[2].text + "'");
            return;
        }
        if (toks.size() != 4 + static_cast<std::size_t>(*k)) {
            error(line, toks[3], ParseErrorKind::Arity,
                  "expected " + std::to_string(*k) + " amplitudes after 'amps'");
            return;
        }
        probe_seen_ = true;
        probe_.branches = *k;
        for (int j = 0; j < *k; ++j) {
            const Token& tok = toks[4 + static_cast<std::size_t>(j)];
            auto amp = parse_amplitude(tok.text);
            if (!amp) {
                error(line, tok, ParseErrorKind::Arity, "bad amplitude '" + tok.text + "'");
                probe_.amps.push_back(Amplitude{});
                continue;
            }
            probe_.amps.push_back(*amp);
        }
    }

    void handle_detector(const Line& line) {
        const auto& toks = line.tokens;
        if (toks.size() != 3) {
            error(line, toks[0], ParseErrorKind::Arity, "'detector' needs a name and a rail");
            return;
        }
        if (!valid_name(toks[1].text)) {
            error(line, toks[1], ParseErrorKind::Arity,
                  "invalid detector name '" + toks[1].text + "'");
            return;
        }
        check_rail(line, toks[2], toks[2].text);
        if (!detectors_.emplace(toks[1].text, toks[2].text).second) {
            error(line, toks[1], ParseErrorKind::Duplicate,
                  "duplicate detector '" + toks[1].text + "'");
        }
    }

    void handle_label(const Line& line) {
        const auto& toks = line.tokens;
        if (toks.size() != 4 || toks[2].text != "=") {
            error(line, toks[0], ParseErrorKind::Arity,
                  "expected 'label <symbol> = <rail>@<slice>'");
            return;
        }
        if (!valid_name(toks[1].text)) {
            error(line, toks[1], ParseErrorKind::Arity,
                  "invalid label symbol '" + toks[1].text + "'");
            return;
        }
        auto at = parse_rail_at(toks[3].text);
        if (!at) {
            error(line, toks[3], ParseErrorKind::Arity,
                  "bad position '" + toks[3].text + "'");
            return;
        }
        if (at->rail) check_rail(line, toks[3], *at->rail);
        for (const auto& l : labels_) {
            if (l.symbol == toks[1].text) {
                error(line, toks[1], ParseErrorKind::Duplicate,
                      "duplicate label '" + toks[1].text + "'");
                return;
            }
        }
        labels_.push_back({toks[1].text, at->rail, static_cast<std::size_t>(at->slice)});
        slice_checks_.push_back({line.number, toks[3], at->slice});
    }

    void handle_expect(const Line& line) {
        const auto& toks = line.tokens;
        if (toks.size() < 2) {
            error(line, toks[0], ParseErrorKind::Arity, "'expect' needs a kind");
            return;
        }
        const std::string& kind = toks[1].text;
        Expectation e;
        std::size_t value_index = 0;

        auto need = [&](std::size_t count, const char* shape) {
            if (toks.size() < count) {
                error(line, toks[1], ParseErrorKind::Arity,
                      "'" + kind + "' expectation needs the form: " + shape);
                return false;
            }
            return true;
        };

        if (kind == "weak" || kind == "abl") {
            if (!need(5, "expect <kind> <rail>@<slice> = <value>")) return;
            auto at = parse_rail_at(toks[2].text);
            if (!at || !at->rail) {
                error(line, toks[2], ParseErrorKind::Arity,
                      "bad position '" + toks[2].text + "'");
                return;
            }
            check_rail(line, toks[2], *at->rail);
            if (toks[3].text != "=") {
                error(line, toks[3], ParseErrorKind::Arity,
                      "expected '=', got '" + toks[3].text + "'");
                return;
            }
            e.kind = kind == "weak" ? ExpectKind::WeakValue : ExpectKind::Abl;
            e.rail = *at->rail;
            e.slice = static_cast<std::size_t>(at->slice);
            slice_checks_.push_back({line.number, toks[2], at->slice});
            value_index = 4;
        } else if (kind == "overlap") {
            if (!need(5, "expect overlap @<slice> = <value>")) return;
            auto at = parse_rail_at(toks[2].text);
            if (!at || at->rail) {
                error(line, toks[2], ParseErrorKind::Arity,
                      "bad slice '" + toks[2].text + "'");
                return;
            }
            if (toks[3].text != "=") {
                error(line, toks[3], ParseErrorKind::Arity,
                      "expected '=', got '" + toks[3].text + "'");
                return;
            }
            e.kind = ExpectKind::Overlap;
            e.slice = static_cast<std::size_t>(at->slice);
            slice_checks_.push_back({line.number, toks[2], at->slice});
            value_index = 4;
        } else if (kind == "prob" || kind == "probe_fidelity" || kind == "probe_match") {
            if (!need(4, "expect <kind> = <value>")) return;
            if (toks[2].text != "=") {
                error(line, toks[2], ParseErrorKind::Arity,
                      "expected '=', got '" + toks[2].text + "'");
                return;
            }
            e.kind = kind == "prob" ? ExpectKind::PostselectProb
                     : kind == "probe_fidelity" ? ExpectKind::ProbeFidelity
                                                : ExpectKind::ProbeMatch;
            value_index = 3;
        } else {
            error(line, toks[1], ParseErrorKind::UnknownKeyword,
                  "unknown expectation kind '" + kind + "'");
            return;
        }

        auto value = parse_amplitude(toks[value_index].text);
        if (!value) {
            error(line, toks[value_index], ParseErrorKind::Arity,
                  "bad value '" + toks[value_index].text + "'");
            return;
        }
        e.value = *value;

        std::size_t note_index = value_index + 1;
        if (note_index < toks.size()) {
            if (!toks[note_index].quoted()) {
                error(line, toks[note_index], ParseErrorKind::Arity,
                      "expected quoted note, got '" + toks[note_index].text + "'");
                return;
            }
            e.note = toks[note_index].unquoted();
            if (note_index + 1 < toks.size()) {
                error(line, toks[note_index + 1], ParseErrorKind::Arity,
                      "unexpected token '" + toks[note_index + 1].text + "'");
                return;
            }
        }
        expects_.push_back(std::move(e));
    }

    void finalize() {
        if (!rails_seen_) whole_input_error(ParseErrorKind::MissingSection, "missing 'rails' section");
        if (!pre_seen_) whole_input_error(ParseErrorKind::MissingSection, "missing 'preselect' section");
        if (!post_seen_) whole_input_error(ParseErrorKind::MissingSection, "missing 'postselect' section");

        for (const PendingSliceCheck& check : slice_checks_) {
            if (check.slice > max_step_) {
                const Line& line = lines_[check.line_index - 1];
                error(line, check.token, ParseErrorKind::Arity,
                      "position '" + check.token.text + "' is beyond the final slice " +
                          std::to_string(max_step_));
            }
        }
    }

    Scenario build() {
        Scenario s;
        s.name = name_;
        Circuit& c = s.circuit;
        c.rails = make_basis(rails_);
        c.steps.resize(static_cast<std::size_t>(max_step_));
        for (auto& [n, elements] : steps_) {
            c.steps[static_cast<std::size_t>(n - 1)] = std::move(elements);
        }
        auto selection = [&](const std::map<std::string, Amplitude>& amps) {
            std::vector<Amplitude> v(c.rails->size());
            for (const auto& [rail, amp] : amps) {
                v[c.rails->index_of(rail)] = amp;
            }
            return StateVector(c.rails, std::move(v));
        };
        c.preselect = selection(pre_);
        c.postselect = selection(post_);
        c.probe = probe_;
        c.detectors = detectors_;
        s.labels = labels_;
        s.expected = expects_;
        canonicalize(s);
        return s;
    }
};

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_amplitude(Amplitude v) {
    std::string out = fmt_real(v.real());
    if (v.imag() != 0.0) {
        if (v.imag() > 0.0) out += "+";
        out += fmt_real(v.imag());
        out += "i";
    }
    return out;
}

} // namespace

ParseResult parse(std::string_view text) {
    return NetlistParser(text).run();
}

std::string serialize(const Scenario& scenario) {
    Scenario s = scenario;
    canonicalize(s);
    const Circuit& c = s.circuit;

    std::ostringstream out;
    if (!s.name.empty()) out << "scenario " << s.name << "\n";

    out << "rails";
    if (c.rails) {
        for (const auto& r : c.rails->labels()) out << " " << r;
    }
    out << "\n";

    for (std::size_t i = 0; i < c.steps.size(); ++i) {
        for (const Element& e : c.steps[i]) {
            out << "step " << (i + 1) << ": ";
            switch (e.kind) {
                case ElementKind::Mixer:
                    out << "bs " << e.rail_a << " " << e.rail_b << " t=" << fmt_real(e.transmission);
                    if (e.phase != 0.0) out << " phase=" << fmt_real(e.phase);
                    break;
                case ElementKind::Phase:
                    out << "phase " << e.rail_a << " " << fmt_real(e.phase);
                    break;
                case ElementKind::Swap:
                    out << "swap " << e.rail_a << " " << e.rail_b;
                    break;
                case ElementKind::Absorber:
                    out << "absorb " << e.rail_a;
                    break;
                case ElementKind::Router:
                    out << "route " << e.rail_a << " probe=" << e.probe_branch
                        << " at=" << e.observed_slice;
                    break;
            }
            out << "\n";
        }
    }

    auto selection = [&](const char* keyword, const StateVector& state) {
        out << keyword;
        for (std::size_t i = 0; i < state.dim(); ++i) {
            if (state[i] == Amplitude{}) continue;
            out << " " << c.rails->label(i) << "=" << fmt_amplitude(state[i]);
        }
        out << "\n";
    };
    selection("preselect", c.preselect);
    selection("postselect", c.postselect);

    if (c.probe.declared()) {
        out << "probe branches " << c.probe.branches << " amps";
        for (const auto& a : c.probe.amps) out << " " << fmt_amplitude(a);
        out << "\n";
    }

    for (const auto& [name, rail] : c.detectors) {
        out << "detector " << name << " " << rail << "\n";
    }

    for (const SliceLabel& l : s.labels) {
        out << "label " << l.symbol << " = " << (l.rail ? *l.rail : "") << "@" << l.slice << "\n";
    }

    for (const Expectation& e : s.expected) {
        out << "expect ";
        switch (e.kind) {
            case ExpectKind::WeakValue:
                out << "weak " << e.rail << "@" << e.slice << " = " << fmt_amplitude(e.value);
                break;
            case ExpectKind::Overlap:
                out << "overlap @" << e.slice << " = " << fmt_amplitude(e.value);
                break;
            case ExpectKind::PostselectProb:
                out << "prob = " << fmt_amplitude(e.value);
                break;
            case ExpectKind::Abl:
                out << "abl " << e.rail << "@" << e.slice << " = " << fmt_amplitude(e.value);
                break;
            case ExpectKind::ProbeFidelity:
                out << "probe_fidelity = " << fmt_amplitude(e.value);
                break;
            case ExpectKind::ProbeMatch:
                out << "probe_match = " << fmt_amplitude(e.value);
                break;
        }
        if (!e.note.empty()) out << " \"" << e.note << "\"";
        out << "\n";
    }

    return out.str();
}

} // namespace tsvf
