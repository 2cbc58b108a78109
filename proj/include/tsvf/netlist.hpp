#pragma once

#include "tsvf/scenarios.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace tsvf {

// Line-oriented scenario netlist (.tsv — two-state-vector netlist).
// One directive per line, '#' starts a comment outside quotes:
//
//   scenario <name>
//   rails <label>+
//   step <n>: bs <r1> <r2> t=<real> [phase=<rad>]
//   step <n>: phase <r> <rad>
//   step <n>: swap <r1> <r2>
//   step <n>: absorb <r>
//   step <n>: route <r> probe=<branch> at=<slice>       (at = n-1)
//   preselect <rail>=<amp> ...
//   postselect <rail>=<amp> ...
//   probe branches <k> amps <a1> ... <ak>
//   detector <name> <rail>
//   label <symbol> = <rail>@<slice> | @<slice>
//   expect weak <rail>@<slice> = <amp> ["note"]
//   expect overlap @<slice> = <amp> ["note"]
//   expect prob = <real> ["note"]
//   expect abl <rail>@<slice> = <real> ["note"]
//   expect probe_fidelity = <real> ["note"]
//   expect probe_match = <real> ["note"]
//
// Numbers are decimal or sqrt(p/q) sugar (optionally negated) for
// quadratic-surd amplitudes; complex amplitudes read <re>+<im>i or
// <re>-<im>i. Lines with the same step number accumulate into one step.

struct SourceSpan {
    std::size_t line = 0;      // 1-based; 0 for whole-input errors
    std::size_t col_begin = 0; // 1-based, inclusive
    std::size_t col_end = 0;   // exclusive
    std::string text;          // the raw source line
};

enum class ParseErrorKind {
    UnknownKeyword,
    UnknownRail,
    Arity,
    NonNormalized,
    Duplicate,
    MissingSection,
};

std::string_view to_string(ParseErrorKind kind);

/// The message always names the offending token verbatim (quoted).
struct ParseError {
    SourceSpan span;
    ParseErrorKind kind = ParseErrorKind::Arity;
    std::string message;
};

struct ParseResult {
    std::optional<Scenario> scenario; // present iff errors is empty
    std::vector<ParseError> errors;

    bool ok() const { return errors.empty(); }
};

/// Collects every error; never throws on any input bytes.
ParseResult parse(std::string_view text);

/// Canonical form: fixed directive order, sorted labels/expectations,
/// 17-significant-digit reals (lossless round-trip), '\n' line endings.
/// parse(serialize(s)) equals s and serialize is idempotent.
std::string serialize(const Scenario& s);

} // namespace tsvf
