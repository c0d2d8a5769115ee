// Fine-grain call-by-value language: every intermediate computation is
// named by a let. Provides the naive translation from the coarse-grain
// language, a linear type checker, and a deterministic evaluator with the
// explicit let rule.
#pragma once

#include <memory>
#include <optional>
#include <string>

#include "envs.hpp"
#include "terms.hpp"
#include "typecheck.hpp"
#include "types.hpp"

namespace hgv {

struct FgVal;
struct FgTerm;
using FgValPtr = std::shared_ptr<const FgVal>;
using FgTermPtr = std::shared_ptr<const FgTerm>;

enum class FgValTag { Var, Const, Unit, Lam, Pair, Inl, Inr };

struct FgVal {
    FgValTag tag;
    Name x;         // Var name; Lam binder
    ConstTag k;     // Const
    TypePtr ann;    // Lam / Inl / Inr annotation (other branch for Inl/Inr)
    FgValPtr a, b;  // Pair components; Inl/Inr payload in a
    FgTermPtr body;  // Lam body
};

enum class FgTermTag { Ret, Let, App, LetUnit, LetPair, Absurd, Case };

struct FgTerm {
    FgTermTag tag;
    Name x, y;      // binders
    FgValPtr v, w;  // value positions (App uses both)
    FgTermPtr m, n;  // Let bound/body; Case branches; LetUnit/LetPair body
    TypePtr ann;    // Absurd result type
};

FgValPtr fv_var(Name x);
FgValPtr fv_const(ConstTag k);
FgValPtr fv_unit();
FgValPtr fv_lam(Name x, TypePtr ann, FgTermPtr body);
FgValPtr fv_pair(FgValPtr a, FgValPtr b);
FgValPtr fv_inl(TypePtr other, FgValPtr a);
FgValPtr fv_inr(TypePtr other, FgValPtr a);

FgTermPtr fg_ret(FgValPtr v);
FgTermPtr fg_let(Name x, FgTermPtr m, FgTermPtr n);
FgTermPtr fg_app(FgValPtr v, FgValPtr w);
FgTermPtr fg_letunit(FgValPtr v, FgTermPtr m);
FgTermPtr fg_letpair(Name x, Name y, FgValPtr v, FgTermPtr m);
FgTermPtr fg_absurd(TypePtr result, FgValPtr v);
FgTermPtr fg_case(FgValPtr v, Name x, FgTermPtr left, Name y, FgTermPtr right);

// The naive translation: let-binds every subterm in a value position. The
// coarse-grain let sugar (application of an unannotated lambda) maps
// directly onto the fine-grain let.
FgTermPtr fg_translate(const TermPtr& m);

// Linear type checking. A let-bound bare constant is remembered as a
// pending schema and must be consumed by an application.
TypePtr fg_check(const TypeEnv& env, const FgTermPtr& m, bool mix = false);

// One deterministic step under contexts E ::= [] | let x = E in M,
// including the explicit rule let x = ret V in M -> M{V/x}.
std::optional<FgTermPtr> fg_step(const FgTermPtr& m);

NameSet fg_free_names(const FgTermPtr& m);
NameSet fg_free_names(const FgValPtr& v);

// Every name occurring in the term, binders included.
NameSet fg_all_names(const FgTermPtr& m);

FgTermPtr fg_subst(const FgTermPtr& m, const FgValPtr& v, const Name& x);

bool fg_alpha_eq(const FgTermPtr& a, const FgTermPtr& b);

std::string show_fg(const FgTermPtr& m);
std::string show_fg_val(const FgValPtr& v);

}  // namespace hgv
