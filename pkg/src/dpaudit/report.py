"""Serializing evidence: JSON report blocks, plain-text rules and DOT trees."""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .dataset import FeatureMatrix
from .distill import MEMBER, PrunedTree, TreeNode, format_value
from .oracle import EnumResult
from .solver import Evidence


def fingerprint(path) -> str:
    """SHA-256 of the CSV with line endings and trailing whitespace normalized."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [line.rstrip() for line in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()


def _num(x):
    return None if x is None else float(x)


def ie_block(ev: Evidence, fm: FeatureMatrix, seed: int) -> dict:
    theta: dict[str, dict[str, float]] = {}
    intercept = None
    for j, info in enumerate(fm.columns):
        if info.kind == "intercept":
            intercept = float(ev.theta_star[j])
            continue
        if info.attribute in ev.key_attributes:
            theta.setdefault(info.attribute, {})[info.label] = float(ev.theta_star[j])
    return {
        "seed": seed,
        "key_attributes": list(ev.key_attributes),
        "dscore": _num(ev.dscore),
        "size_ratio": float(ev.size_ratio),
        "constraint_ok": bool(ev.constraint_ok),
        "theta": {a: theta[a] for a in ev.key_attributes},
        "intercept": intercept,
        "final_objective": float(ev.trace[-1]) if ev.trace else None,
        "members": ev.member_indices,
    }


def rule_dict(rule) -> dict:
    return {
        "predicates": [[a, op, v] for a, op, v in rule.predicates],
        "text": rule.conditions(),
        "label": rule.label,
        "support": rule.support,
        "member_rate": rule.member_rate,
        "fav_rate": rule.fav_rate,
    }


def ie_dt_block(pt: PrunedTree) -> dict:
    return {
        "dscore_prime": _num(pt.dscore_prime),
        "size_ratio": pt.size_ratio,
        "constraint_ok": bool(pt.constraint_ok),
        "depth": pt.depth,
        "n_leaves": pt.root.n_leaves,
        "psi": pt.psi,
        "rules": [rule_dict(r) for r in pt.rules],
        "members": pt.member_indices,
    }


def enum_block(res: EnumResult) -> dict:
    return {
        "predicates": [[p.attribute, p.op, p.value] for p in res.predicates],
        "dscore": _num(res.dscore),
        "explored": res.explored,
        "exhausted_budget": res.exhausted_budget,
        "members": [] if res.members is None else np.flatnonzero(res.members).tolist(),
    }


def rules_text(report: dict) -> str:
    out = []
    ie = report.get("ie")
    if ie:
        out.append(f"Key attributes: {', '.join(ie['key_attributes']) or '(none)'}")
        out.append(f"DScore: {ie['dscore']}  |S|/n: {ie['size_ratio']:.4f}  "
                   f"constraint_ok: {ie['constraint_ok']}")
    dt = report.get("ie_dt")
    if dt:
        out.append("")
        out.append(f"Decision tree (depth {dt['depth']}, psi={dt['psi']:.6g}): "
                   f"DScore'={dt['dscore_prime']}  |S'|/n={dt['size_ratio']:.4f}")
        for r in dt["rules"]:
            out.append(f"  IF {r['text']} THEN {r['label']} "
                       f"(support={r['support']}, fav_rate={r['fav_rate']:.4f})")
    en = report.get("enum")
    if en:
        out.append("")
        conj = " AND ".join(f"{a} {op} {format_value(v)}" for a, op, v in en["predicates"]) or "(none)"
        out.append(f"Enum: {conj}  DScore={en['dscore']}  explored={en['explored']}"
                   + ("  [budget exhausted]" if en["exhausted_budget"] else ""))
    return "\n".join(out) + "\n"


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(pt: PrunedTree | TreeNode, columns=None) -> str:
    """Render a tree as a Graphviz digraph.

    Split nodes show their predicate in original units; the ``yes`` edge is
    the branch where the predicate holds. Leaves show label, support, member
    fraction and favorable rate.
    """
    if isinstance(pt, PrunedTree):
        root, columns = pt.root, pt.columns
    else:
        root = pt
    lines = ["digraph evidence_tree {",
             '  node [shape=box, fontname="Helvetica"];']
    counter = [0]

    def visit(node) -> str:
        name = f"n{counter[0]}"
        counter[0] += 1
        if node.is_leaf:
            fav_rate = node.fav_count / node.count if node.count else 0.0
            member_rate = node.member_count / node.count if node.count else 0.0
            label = (f"{node.label}\\nsupport={node.count}\\n"
                     f"member_rate={member_rate:.2f}\\nfav_rate={fav_rate:.2f}")
            color = "#f4cccc" if node.label == MEMBER else "#cfe2f3"
            lines.append(f'  {name} [label="{label}", style=filled, fillcolor="{color}"];')
            return name
        info = columns[node.column]
        if info.kind == "onehot":
            text, yes_left = f"{info.attribute} = {info.value}", False
        else:
            text, yes_left = f"{info.attribute} <= {format_value(float(info.to_original(node.threshold)))}", True
        lines.append(f"  {name} [label={_quote(text)}];")
        left = visit(node.left)
        right = visit(node.right)
        lines.append(f'  {name} -> {left} [label="{"yes" if yes_left else "no"}"];')
        lines.append(f'  {name} -> {right} [label="{"no" if yes_left else "yes"}"];')
        return name

    visit(root)
    lines.append("}")
    return "\n".join(lines) + "\n"
