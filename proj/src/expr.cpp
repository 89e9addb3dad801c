#include "sheafver/expr.hpp"

#include <algorithm>
#include <sstream>

namespace sheafver {

const OpSig* Signature::find_op(const std::string& n) const {
    for (const auto& o : ops)
        if (o.name == n) return &o;
    return nullptr;
}

const PredSig* Signature::find_pred(const std::string& n) const {
    for (const auto& p : preds)
        if (p.name == n) return &p;
    return nullptr;
}

bool Signature::has_sort(const std::string& n) const {
    return std::find(sorts.begin(), sorts.end(), n) != sorts.end();
}

const Sort* FiniteModel::find_carrier(const std::string& n) const {
    for (const auto& s : carriers)
        if (s.name == n) return &s;
    return nullptr;
}

void Vocabulary::validate() const {
    for (const auto& sn : sig.sorts)
        if (!model.find_carrier(sn)) throw ValidationError("sort without carrier: " + sn);
    for (const auto& s : model.carriers) {
        if (s.lo > s.hi) throw ValidationError("empty carrier for sort " + s.name);
        if (!sig.has_sort(s.name)) throw ValidationError("carrier for undeclared sort " + s.name);
    }
    for (const auto& op : sig.ops) {
        for (const auto& a : op.arg_sorts)
            if (!sig.has_sort(a)) throw ValidationError("op " + op.name + ": unknown arg sort " + a);
        if (!sig.has_sort(op.result_sort))
            throw ValidationError("op " + op.name + ": unknown result sort " + op.result_sort);
        auto it = model.op_tables.find(op.name);
        if (it == model.op_tables.end()) throw ValidationError("op without table: " + op.name);
        // Totality: every argument tuple over the carriers must be mapped.
        std::vector<const Sort*> doms;
        size_t total = 1;
        for (const auto& a : op.arg_sorts) {
            doms.push_back(model.find_carrier(a));
            total *= static_cast<size_t>(doms.back()->size());
        }
        if (it->second.size() != total)
            throw ValidationError("op table not total: " + op.name);
        const Sort* res = model.find_carrier(op.result_sort);
        for (const auto& [key, val] : it->second) {
            if (key.size() != op.arg_sorts.size())
                throw ValidationError("op table arity mismatch: " + op.name);
            for (size_t i = 0; i < key.size(); ++i)
                if (!doms[i]->contains(key[i]))
                    throw ValidationError("op table key outside carrier: " + op.name);
            if (!res->contains(val))
                throw ValidationError("op table value outside carrier: " + op.name);
        }
    }
    for (const auto& pr : sig.preds) {
        auto it = model.pred_tables.find(pr.name);
        if (it == model.pred_tables.end()) throw ValidationError("pred without table: " + pr.name);
        for (const auto& tup : it->second) {
            if (tup.size() != pr.arg_sorts.size())
                throw ValidationError("pred tuple arity mismatch: " + pr.name);
            for (size_t i = 0; i < tup.size(); ++i)
                if (!model.find_carrier(pr.arg_sorts[i])->contains(tup[i]))
                    throw ValidationError("pred tuple outside carrier: " + pr.name);
        }
    }
}

static ExprPtr make(ExprKind k) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    return e;
}

ExprPtr eint(long long v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::IntConst;
    e->ival = v;
    return e;
}

ExprPtr ebool(bool v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::BoolConst;
    e->ival = v ? 1 : 0;
    return e;
}

ExprPtr evar(const std::string& n) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Var;
    e->name = n;
    return e;
}

ExprPtr eprimed(const std::string& n) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::PrimedVar;
    e->name = n;
    return e;
}

ExprPtr eop(const std::string& n, std::vector<ExprPtr> args) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::OpApp;
    e->name = n;
    e->args = std::move(args);
    return e;
}

ExprPtr epred(const std::string& n, std::vector<ExprPtr> args) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::PredApp;
    e->name = n;
    e->args = std::move(args);
    return e;
}

static ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->args = {std::move(a), std::move(b)};
    return e;
}

ExprPtr eadd(ExprPtr a, ExprPtr b) { return binary(ExprKind::Add, std::move(a), std::move(b)); }
ExprPtr esub(ExprPtr a, ExprPtr b) { return binary(ExprKind::Sub, std::move(a), std::move(b)); }
ExprPtr emul(ExprPtr a, ExprPtr b) { return binary(ExprKind::Mul, std::move(a), std::move(b)); }

ExprPtr ecmp(CmpOp op, ExprPtr a, ExprPtr b) {
    auto e = binary(ExprKind::Cmp, std::move(a), std::move(b));
    const_cast<Expr*>(e.get())->cmp = op;
    return e;
}

ExprPtr eand(ExprPtr a, ExprPtr b) { return binary(ExprKind::And, std::move(a), std::move(b)); }
ExprPtr eor(ExprPtr a, ExprPtr b) { return binary(ExprKind::Or, std::move(a), std::move(b)); }

ExprPtr enot(ExprPtr a) {
    auto e = make(ExprKind::Not);
    const_cast<Expr*>(e.get())->args = {std::move(a)};
    return e;
}

ExprPtr clone_expr(const ExprPtr& e) {
    auto c = std::make_shared<Expr>(*e);
    c->slot = -1;
    for (auto& a : c->args) a = clone_expr(a);
    return c;
}

static const char* cmp_str(CmpOp c) {
    switch (c) {
        case CmpOp::Eq: return "==";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
    }
    return "?";
}

std::string expr_to_string(const ExprPtr& e) {
    std::ostringstream os;
    switch (e->kind) {
        case ExprKind::IntConst: os << e->ival; break;
        case ExprKind::BoolConst: os << (e->ival ? "true" : "false"); break;
        case ExprKind::Var: os << e->name; break;
        case ExprKind::PrimedVar: os << e->name << "'"; break;
        case ExprKind::OpApp:
        case ExprKind::PredApp: {
            os << e->name << "(";
            for (size_t i = 0; i < e->args.size(); ++i) {
                if (i) os << ", ";
                os << expr_to_string(e->args[i]);
            }
            os << ")";
            break;
        }
        case ExprKind::Add:
            os << "(" << expr_to_string(e->args[0]) << " + " << expr_to_string(e->args[1]) << ")";
            break;
        case ExprKind::Sub:
            os << "(" << expr_to_string(e->args[0]) << " - " << expr_to_string(e->args[1]) << ")";
            break;
        case ExprKind::Mul:
            os << "(" << expr_to_string(e->args[0]) << " * " << expr_to_string(e->args[1]) << ")";
            break;
        case ExprKind::Cmp:
            os << "(" << expr_to_string(e->args[0]) << " " << cmp_str(e->cmp) << " "
               << expr_to_string(e->args[1]) << ")";
            break;
        case ExprKind::And:
            os << "(" << expr_to_string(e->args[0]) << " && " << expr_to_string(e->args[1]) << ")";
            break;
        case ExprKind::Or:
            os << "(" << expr_to_string(e->args[0]) << " || " << expr_to_string(e->args[1]) << ")";
            break;
        case ExprKind::Not: os << "!" << expr_to_string(e->args[0]); break;
    }
    return os.str();
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    return expr_to_string(a) == expr_to_string(b);
}

void collect_vars(const ExprPtr& e, std::set<std::string>& unprimed, std::set<std::string>& primed) {
    switch (e->kind) {
        case ExprKind::Var: unprimed.insert(e->name); break;
        case ExprKind::PrimedVar: primed.insert(e->name); break;
        default:
            for (const auto& a : e->args) collect_vars(a, unprimed, primed);
    }
}

}  // namespace sheafver
