// Value and session types for the session-typed linear lambda calculus,
// together with session duality.
#pragma once

#include <memory>
#include <string>

namespace hgv {

struct Type;
struct Session;
using TypePtr = std::shared_ptr<const Type>;
using SessionPtr = std::shared_ptr<const Session>;

enum class TypeTag {
    Unit,     // 1
    Void,     // 0
    Product,  // T * U
    Sum,      // T + U
    Lolli,    // T -o U
    Session,  // embedded session type
};

enum class SessionTag {
    Send,    // !T.S
    Recv,    // ?T.S
    EndOut,  // end!
    EndIn,   // end?
    End,     // self-dual end (Mix variant only)
};

struct Type {
    TypeTag tag;
    TypePtr a, b;  // Product / Sum / Lolli components
    SessionPtr s;  // Session payload
};

struct Session {
    SessionTag tag;
    TypePtr payload;  // Send / Recv message type
    SessionPtr cont;  // Send / Recv continuation
};

TypePtr t_unit();
TypePtr t_void();
TypePtr t_product(TypePtr a, TypePtr b);
TypePtr t_sum(TypePtr a, TypePtr b);
TypePtr t_lolli(TypePtr a, TypePtr b);
TypePtr t_session(SessionPtr s);

SessionPtr s_send(TypePtr t, SessionPtr s);
SessionPtr s_recv(TypePtr t, SessionPtr s);
SessionPtr s_end_out();
SessionPtr s_end_in();
SessionPtr s_end();

// Duality: output <-> input, end! <-> end?, end self-dual.
SessionPtr dual(const SessionPtr& s);

bool type_eq(const TypePtr& a, const TypePtr& b);
bool session_eq(const SessionPtr& a, const SessionPtr& b);

// True if the type is a session type (an embedded Session node).
bool is_session_type(const TypePtr& t);

std::string show_type(const TypePtr& t);
std::string show_session(const SessionPtr& s);

}  // namespace hgv
