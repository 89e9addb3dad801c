#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sheafver {

using Value = int32_t;

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// A sort names a bounded integer carrier lo..hi (inclusive).
struct Sort {
    std::string name;
    Value lo = 0;
    Value hi = 0;

    Value size() const { return hi - lo + 1; }
    bool contains(Value v) const { return v >= lo && v <= hi; }
    bool operator==(const Sort&) const = default;
};

// Declares names and arities only; interpretations live in FiniteModel.
struct OpSig {
    std::string name;
    std::vector<std::string> arg_sorts;
    std::string result_sort;
    bool operator==(const OpSig&) const = default;
};

struct PredSig {
    std::string name;
    std::vector<std::string> arg_sorts;
    bool operator==(const PredSig&) const = default;
};

struct Signature {
    std::vector<std::string> sorts;
    std::vector<OpSig> ops;
    std::vector<PredSig> preds;

    const OpSig* find_op(const std::string& n) const;
    const PredSig* find_pred(const std::string& n) const;
    bool has_sort(const std::string& n) const;
    bool operator==(const Signature&) const = default;
};

// Total interpretation of a signature over bounded integer carriers.
struct FiniteModel {
    std::vector<Sort> carriers;                       // one per signature sort
    std::map<std::string, std::map<std::vector<Value>, Value>> op_tables;
    std::map<std::string, std::set<std::vector<Value>>> pred_tables;

    const Sort* find_carrier(const std::string& n) const;
    bool operator==(const FiniteModel&) const = default;
};

struct Vocabulary {
    Signature sig;
    FiniteModel model;

    const Sort* find_sort(const std::string& n) const { return model.find_carrier(n); }
    // Checks op tables are total and sort-correct, pred tuples sort-correct.
    void validate() const;
    bool operator==(const Vocabulary&) const = default;
};

enum class ExprKind {
    IntConst,
    BoolConst,
    Var,        // unprimed variable (or action name in boolean action constraints)
    PrimedVar,  // post-state variable, only valid in transition specs
    OpApp,
    PredApp,
    Add,
    Sub,
    Mul,
    Cmp,
    And,
    Or,
    Not,
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind;
    long long ival = 0;   // IntConst / BoolConst (0/1)
    CmpOp cmp = CmpOp::Eq;
    std::string name;     // Var/PrimedVar/OpApp/PredApp
    std::vector<ExprPtr> args;

    // Filled by binding against a concrete system; -1 when unbound.
    int slot = -1;
};

ExprPtr eint(long long v);
ExprPtr ebool(bool v);
ExprPtr evar(const std::string& n);
ExprPtr eprimed(const std::string& n);
ExprPtr eop(const std::string& n, std::vector<ExprPtr> args);
ExprPtr epred(const std::string& n, std::vector<ExprPtr> args);
ExprPtr eadd(ExprPtr a, ExprPtr b);
ExprPtr esub(ExprPtr a, ExprPtr b);
ExprPtr emul(ExprPtr a, ExprPtr b);
ExprPtr ecmp(CmpOp op, ExprPtr a, ExprPtr b);
ExprPtr eand(ExprPtr a, ExprPtr b);
ExprPtr eor(ExprPtr a, ExprPtr b);
ExprPtr enot(ExprPtr a);

ExprPtr clone_expr(const ExprPtr& e);

// Structural equality on the canonical printed form.
bool expr_equal(const ExprPtr& a, const ExprPtr& b);
std::string expr_to_string(const ExprPtr& e);

// Collects unprimed/primed variable names referenced by e.
void collect_vars(const ExprPtr& e, std::set<std::string>& unprimed, std::set<std::string>& primed);

}  // namespace sheafver
