// Core term and configuration ASTs, free names, capture-avoiding
// substitution, alpha-equivalence, and a fresh-name supply.
#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "types.hpp"

namespace hgv {

using Name = std::string;
using NameSet = std::set<Name>;

enum class ConstTag { Link, Fork, SendK, RecvK, Wait, Close, Spawn };

enum class TermTag {
    Var,      // x
    Const,    // link | fork | send | recv | wait | close | spawn
    Lam,      // \x:T. M          (binder x, ann = T, m = body)
    App,      // M N
    Unit,     // ()
    LetUnit,  // let () = M in N
    Pair,     // (M, N)
    LetPair,  // let (x,y) = M in N
    Inl,      // inl [U] M        (ann = the other branch type U)
    Inr,      // inr [T] M        (ann = the other branch type T)
    Case,     // case M { inl x -> N ; inr y -> O }
    Absurd,   // absurd [T] M     (ann = result type T)
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    TermTag tag;
    Name x, y;     // Var name; Lam/LetPair/Case binders
    ConstTag k;    // Const
    TypePtr ann;   // Lam / Inl / Inr / Absurd annotation
    TermPtr m, n, o;  // subterms (Case uses all three)
};

TermPtr mk_var(Name x);
TermPtr mk_const(ConstTag k);
TermPtr mk_lam(Name x, TypePtr ann, TermPtr body);
TermPtr mk_app(TermPtr m, TermPtr n);
TermPtr mk_unit();
TermPtr mk_letunit(TermPtr m, TermPtr n);
TermPtr mk_pair(TermPtr m, TermPtr n);
TermPtr mk_letpair(Name x, Name y, TermPtr m, TermPtr n);
TermPtr mk_inl(TypePtr other, TermPtr m);
TermPtr mk_inr(TypePtr other, TermPtr m);
TermPtr mk_case(TermPtr scrut, Name x, TermPtr left, Name y, TermPtr right);
TermPtr mk_absurd(TypePtr result, TermPtr m);

// let x = M in N  desugars to  (\x:T.N) M; the annotation is supplied by the
// caller (parser or test) since the checker is syntax-directed.
TermPtr mk_let(Name x, TypePtr ann, TermPtr bound, TermPtr body);
// M ; N  desugars to  let () = M in N.
TermPtr mk_seq(TermPtr m, TermPtr n);

enum class ConfigTag {
    Thread,      // main M | child M
    LinkThread,  // link z x y   (waits on z, then fuses x with y)
    Res,         // new (x y : S). C   (S types endpoint x; y has dual S)
    Par,         // C || D
};

struct Config;
using ConfigPtr = std::shared_ptr<const Config>;

struct Config {
    ConfigTag tag;
    bool is_main = false;  // Thread flag
    TermPtr term;          // Thread payload
    Name z, x, y;          // LinkThread names; Res binders are x, y
    SessionPtr ann;        // Res annotation
    ConfigPtr c, d;        // Res body c; Par children c, d
};

ConfigPtr mk_thread(bool is_main, TermPtr term);
ConfigPtr mk_link_thread(Name z, Name x, Name y);
ConfigPtr mk_res(Name x, Name y, SessionPtr ann, ConfigPtr body);
ConfigPtr mk_par(ConfigPtr c, ConfigPtr d);

bool is_value(const TermPtr& m);

NameSet free_names(const TermPtr& m);
NameSet free_names(const ConfigPtr& c);
// All names occurring in the configuration, bound or free.
NameSet all_names(const ConfigPtr& c);
NameSet all_names(const TermPtr& m);

// Fresh-name supply: returns `base` if it avoids `avoid`, otherwise the
// first base+suffix that does. The chosen name is added to `avoid`.
Name fresh_name(const Name& base, NameSet& avoid);

// Capture-avoiding substitution of value v for free occurrences of x.
TermPtr subst(const TermPtr& m, const TermPtr& v, const Name& x);
ConfigPtr subst(const ConfigPtr& c, const TermPtr& v, const Name& x);
// Name-for-name substitution on configurations (used by link reduction);
// renames endpoint occurrences in link threads too.
ConfigPtr rename_config(const ConfigPtr& c, const Name& to, const Name& from);

bool alpha_eq(const TermPtr& a, const TermPtr& b);
bool alpha_eq(const ConfigPtr& a, const ConfigPtr& b);

// AST size (node count); the termination measure on configurations.
int term_size(const TermPtr& m);
int config_size(const ConfigPtr& c);

std::string show_term(const TermPtr& m);
std::string show_config(const ConfigPtr& c);
std::string show_const(ConstTag k);

}  // namespace hgv
