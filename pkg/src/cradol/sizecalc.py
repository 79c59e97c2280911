"""Exact policy-search problem-size arithmetic.

Compares three ways of counting the deterministic-policy search space over a
finite belief abstraction: a flat policy, a naive option decomposition that
hands every option the full belief space, and the abstracted decomposition
where each option sees only a subset of belief variables and the policy over
options gets its own compact belief. All arithmetic is arbitrary-precision
Python int; floats appear only in the optional scientific rendering.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal


@dataclass(frozen=True)
class ProblemSpec:
    """Belief/action/option cardinalities for one sizing question.

    option_subsets[i] is the belief-subset size seen by option i;
    option_policy_beliefs is the belief size given to the policy over options.
    """

    actions: int
    beliefs: int
    options: int
    option_subsets: tuple
    option_policy_beliefs: int

    def __post_init__(self):
        object.__setattr__(self, "option_subsets", tuple(int(s) for s in self.option_subsets))
        if self.actions < 1 or self.beliefs < 0 or self.options < 1:
            raise ValueError("actions and options must be >= 1, beliefs >= 0")
        if len(self.option_subsets) != self.options:
            raise ValueError(
                f"need one subset size per option: got {len(self.option_subsets)} "
                f"for {self.options} options"
            )
        if any(s < 0 for s in self.option_subsets) or self.option_policy_beliefs < 0:
            raise ValueError("subset sizes must be non-negative")


# appendix-style worked example: 4 actions, 16 belief variables, 3 options
FIGURE1 = ProblemSpec(
    actions=4, beliefs=16, options=3, option_subsets=(6, 5, 4), option_policy_beliefs=4
)

PRESETS = {"figure1": FIGURE1}


def flat_size(spec: ProblemSpec) -> int:
    """|A|^|B|: deterministic policies over the full belief space."""
    return spec.actions**spec.beliefs


def naive_oc_size(spec: ProblemSpec) -> int:
    """|Omega| * |A|^|B|: every option carries the full belief space."""
    return spec.options * spec.actions**spec.beliefs


def abstracted_policy_sum(spec: ProblemSpec) -> int:
    """Sum over options of |A|^|B_w|: the abstracted intra-option policies alone."""
    return sum(spec.actions**s for s in spec.option_subsets)


def cradol_size(spec: ProblemSpec) -> int:
    """|Omega|^|B_Omega| + sum_w (|A|^|B_w| + 2^|B_w|).

    Per-option terms count the intra-option policy and the binary termination
    policy over that option's belief subset; the leading term is the policy
    over options on its own compact belief.
    """
    per_option = sum(spec.actions**s + 2**s for s in spec.option_subsets)
    return spec.options**spec.option_policy_beliefs + per_option


@dataclass(frozen=True)
class Remark1Result:
    holds: bool
    abstracted_sum: int
    flat: int
    naive_oc: int
    boundary: str | None = None


def verify_remark1(spec: ProblemSpec) -> Remark1Result:
    """Check sum_w |A|^|B_w| < |A|^|B| < |Omega| * |A|^|B| exactly.

    Requires every option subset strictly smaller than the full belief
    space; a violated precondition raises rather than returning a verdict.
    The options == 1 edge degenerates the right inequality to equality and
    is reported as a boundary, not an error.
    """
    if any(s >= spec.beliefs for s in spec.option_subsets):
        raise ValueError(
            "verify_remark1: every option subset must be strictly smaller than "
            f"the full belief space ({spec.beliefs}); got {spec.option_subsets}"
        )
    left = abstracted_policy_sum(spec)
    mid = flat_size(spec)
    right = naive_oc_size(spec)
    holds = left < mid < right
    boundary = None
    if spec.options == 1:
        boundary = "options == 1: the naive option bound equals the flat size"
    return Remark1Result(holds=holds, abstracted_sum=left, flat=mid, naive_oc=right, boundary=boundary)


def scientific(n: int, sig: int = 3) -> str:
    """Exact int -> short scientific string, e.g. 12884901888 -> '1.29e10'."""
    if n == 0:
        return "0"
    d = Decimal(n)
    s = f"{d:.{sig - 1}E}"
    mant, exp = s.split("E")
    return f"{mant}e{int(exp)}"


def report_lines(spec: ProblemSpec) -> list:
    """Human-readable table used by the CLI."""
    flat = flat_size(spec)
    naive = naive_oc_size(spec)
    cradol = cradol_size(spec)
    lines = [
        f"actions={spec.actions} beliefs={spec.beliefs} options={spec.options} "
        f"subsets={','.join(str(s) for s in spec.option_subsets)} "
        f"option_policy_beliefs={spec.option_policy_beliefs}",
        f"flat      |A|^|B|                  = {flat} ({scientific(flat)})",
        f"naive OC  |O|*|A|^|B|              = {naive} ({scientific(naive)})",
        f"abstracted|O|^|Bo|+sum(A^Bw+2^Bw)  = {cradol} ({scientific(cradol)})",
    ]
    try:
        res = verify_remark1(spec)
        verdict = "holds" if res.holds else "FAILS"
        lines.append(
            f"size ordering sum_w A^Bw < A^B < O*A^B: {verdict} "
            f"({res.abstracted_sum} < {res.flat} < {res.naive_oc})"
        )
        if res.boundary:
            lines.append(f"boundary: {res.boundary}")
    except ValueError as e:
        lines.append(f"size ordering not checkable: {e}")
    return lines
