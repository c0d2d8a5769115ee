// Concrete syntax: lexer, parser, and desugaring.
//
// The grammar (published in docs/grammar.ebnf) covers value/session types,
// terms with let/seq/lambda-pattern sugar and the synchronous choice
// encoding (select/offer and the (+)/(&) type macros), configurations, and
// the environment syntax used on the command line.
#pragma once

#include <stdexcept>
#include <string>
#include <variant>

#include "envs.hpp"
#include "terms.hpp"
#include "types.hpp"

namespace hgv {

struct ParseError : std::runtime_error {
    int line, column;
    ParseError(int line, int column, const std::string& msg)
        : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                             std::to_string(column) + ": " + msg),
          line(line),
          column(column) {}
};

struct Parsed {
    // Exactly one of the two is set.
    TermPtr term;
    ConfigPtr config;
    bool is_config() const { return config != nullptr; }
};

TermPtr parse_term(const std::string& src);
ConfigPtr parse_config(const std::string& src);
// Detects whether the source is a term or a configuration.
Parsed parse_program(const std::string& src);

TypePtr parse_type(const std::string& src);
SessionPtr parse_session(const std::string& src);

// Environments separated by `|`, bindings by `,`; an empty segment is an
// empty environment (e.g. "x:!1.end!, p:1 | y:?1.end?").
HyperEnv parse_hyperenv(const std::string& src);
// GV environment: value bindings plus locks written `x~y:S`.
GvEnv parse_gv_env(const std::string& src);
// Co-name set: "{x,x'}, {y,y'}".
CoNameSet parse_conames(const std::string& src);

// Choice encoding type macros (the session-level part of the sugar).
SessionPtr choice_plus(const SessionPtr& s1, const SessionPtr& s2);   // S1 (+) S2
SessionPtr choice_with(const SessionPtr& s1, const SessionPtr& s2);   // S1 (&) S2
SessionPtr choice_plus_empty();                                       // (+){}
SessionPtr choice_with_empty();                                       // (&){}

// Choice encoding term macros.
TermPtr select_term(bool left, const SessionPtr& s1, const SessionPtr& s2);
TermPtr offer_term(const TermPtr& scrutinee, const Name& xl, const TermPtr& left,
                   const Name& xr, const TermPtr& right);
TermPtr offer_empty_term(const TermPtr& scrutinee, const TypePtr& result);

// The Mix-variant spawn encoding as a first-class function value.
TermPtr spawn_encoding();

}  // namespace hgv
