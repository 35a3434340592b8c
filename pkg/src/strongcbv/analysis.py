"""Runtime audits for the machines: decoding, shape invariants, potential
accounting, and lockstep comparison of the two machine variants.

The potential of a configuration is a nonnegative integer that drops on
every transition except rule 7, whose increase is bounded by the initial
term's potential; together these bound every trace's length.  The audit
below recomputes the potential, the decoding, and the shape classes after
each transition of a run and checks each step against what the machine is
supposed to guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import env_machine, reduction, subst_machine
from .errors import AuditViolation, FuelError, MachineStuck, ShapeViolation
from .syntax import App, Ident, Lam, Term, Var, alpha_eq, is_closed
from .subst_machine import (
    MODE_C,
    MODE_E,
    MODE_M,
    MODE_S,
    Annot,
    ArgNF,
    ArgVal,
    AVar,
    Binder,
    Config,
    Delim,
    FunTerm,
    FunVal,
    Memo,
    VApp,
    VLam,
)

DEFAULT_FUEL = subst_machine.DEFAULT_FUEL
BYPASS_LIMIT = 10**4

CSV_FIELDS = ("step", "rule", "mode", "phi_total", "phi_heap", "stack_depth", "heap_size")
CSV_HEADER = ",".join(CSV_FIELDS)

SHAPE_CLASSES = ("E-S1", "C-S1-vw", "C-S2-vi", "M-n-S3-vw", "M-a-S2-vi", "S-S2-a", "S-S3-n")


class _Caches:
    """Identity-keyed memo tables for one analysis session.

    Machine terms and values are immutable and heavily shared between
    consecutive configurations, so caching per object keeps per-step cost
    proportional to what the step changed.  Values hold a strong reference
    to their key object so ids cannot be recycled underneath the table.
    """

    def __init__(self):
        self.dec_term: dict[int, tuple] = {}
        self.dec_value: dict[int, tuple] = {}
        self.phi_term: dict[int, tuple] = {}
        self.phi_value: dict[int, tuple] = {}
        self.phi_frame: dict[int, tuple] = {}
        self.phi_loc: dict[int, int] = {}
        self.locs_term: dict[int, tuple] = {}
        self.locs_value: dict[int, tuple] = {}
        self.wf_term: dict[int, tuple] = {}
        self.value_class: dict[int, tuple] = {}
        self.nf_class: dict[int, tuple] = {}


# --- decoding --------------------------------------------------------------


def _decode_term(t, c: _Caches) -> Term:
    hit = c.dec_term.get(id(t))
    if hit is not None:
        return hit[1]
    match t:
        case Var(_):
            out = t
        case App(f, a):
            f2 = _decode_term(f, c)
            a2 = _decode_term(a, c)
            out = t if f2 is f and a2 is a else App(f2, a2)
        case Lam(x, b):
            b2 = _decode_term(b, c)
            out = t if b2 is b else Lam(x, b2)
        case Delim(v):
            out = _decode_value(v, c)
        case _:
            raise TypeError(f"not a machine term: {t!r}")
    c.dec_term[id(t)] = (t, out)
    return out


def _decode_value(v, c: _Caches) -> Term:
    hit = c.dec_value.get(id(v))
    if hit is not None:
        return hit[1]
    match v:
        case AVar(x):
            out = Var(x)
        case VApp(f, a):
            out = App(_decode_value(f, c), _decode_value(a, c))
        case VLam(x, b):
            out = Lam(x, _decode_term(b, c))
        case Annot(_, inner):
            out = _decode_value(inner, c)
        case _:
            raise TypeError(f"not a machine value: {v!r}")
    c.dec_value[id(v)] = (v, out)
    return out


def _decode_config(cfg: Config, c: _Caches) -> Term:
    if cfg.mode in (MODE_E, MODE_S):
        acc = _decode_term(cfg.term, c)
    else:
        acc = _decode_value(cfg.value, c)
    for f in reversed(cfg.stack):
        match f:
            case FunTerm(t):
                acc = App(_decode_term(t, c), acc)
            case ArgVal(v):
                acc = App(acc, _decode_value(v, c))
            case FunVal(v):
                acc = App(_decode_value(v, c), acc)
            case ArgNF(t):
                acc = App(acc, t)
            case Binder(x):
                acc = Lam(x, acc)
            case Memo(_):
                pass
    return acc


def decode_config(cfg: Config) -> Term:
    """The source term a configuration stands for: annotations and memo
    frames erase, delimiters unwrap, the stack becomes the surrounding
    context."""
    return _decode_config(cfg, _Caches())


# --- shape invariants --------------------------------------------------------


def _wf_term(t, c: _Caches) -> bool:
    """Every delimiter wraps an annotated value; no nested annotations."""
    hit = c.wf_term.get(id(t))
    if hit is not None:
        return hit[1]
    match t:
        case Var(_):
            ok = True
        case App(f, a):
            ok = _wf_term(f, c) and _wf_term(a, c)
        case Lam(_, b):
            ok = _wf_term(b, c)
        case Delim(v):
            if not isinstance(v, Annot):
                raise ShapeViolation("delimiter around an unannotated value")
            _value_class(v, c)
            ok = True
        case _:
            raise ShapeViolation(f"not a machine term: {t!r}")
    c.wf_term[id(t)] = (t, ok)
    return ok


_VW = "vw"
_VI = "vi"


def _value_class(v, c: _Caches) -> frozenset:
    """Membership of a value among weak ({vw}) and inert ({vw, vi}) values."""
    hit = c.value_class.get(id(v))
    if hit is not None:
        return hit[1]
    match v:
        case AVar(_):
            out = frozenset((_VW, _VI))
        case VLam(_, b):
            _wf_term(b, c)
            out = frozenset((_VW,))
        case VApp(f, a):
            if _VI not in _value_class(f, c):
                raise ShapeViolation("value application whose head is not inert")
            _value_class(a, c)
            out = frozenset((_VW, _VI))
        case Annot(_, inner):
            if isinstance(inner, Annot):
                raise ShapeViolation("nested location annotations")
            out = _value_class(inner, c)
        case _:
            raise ShapeViolation(f"not a machine value: {v!r}")
    c.value_class[id(v)] = (v, out)
    return out


def _nf_class(t, c: _Caches) -> tuple[bool, bool]:
    """(is normal, is neutral) for a pure term, safe on shared structure."""
    hit = c.nf_class.get(id(t))
    if hit is not None:
        return hit[1]
    match t:
        case Var(_):
            out = (True, True)
        case Lam(_, b):
            out = (_nf_class(b, c)[0], False)
        case App(f, a):
            good = _nf_class(f, c)[1] and _nf_class(a, c)[0]
            out = (good, good)
        case _:
            raise ShapeViolation(f"not a pure term: {t!r}")
    c.nf_class[id(t)] = (t, out)
    return out


_S1, _S2, _S3 = "S1", "S2", "S3"


def _stack_classes(stack, c: _Caches) -> frozenset:
    """Grammar memberships of the stack among S1/S2/S3, computed from the
    bottom up (the empty stack is an S3, hence also S1 and S2)."""
    cls = frozenset((_S1, _S2, _S3))
    for f in stack:
        out = set()
        match f:
            case FunTerm(t):
                _wf_term(t, c)
                if _S1 in cls:
                    out.add(_S1)
            case ArgVal(v):
                _value_class(v, c)
                if _S1 in cls:
                    out.add(_S1)
            case Memo(_):
                if _S2 in cls:
                    out.add(_S2)
                if _S3 in cls:
                    out.add(_S3)
            case ArgNF(t):
                if not _nf_class(t, c)[0]:
                    raise ShapeViolation("argument frame holding a non-normal term")
                if _S2 in cls:
                    out.add(_S2)
            case FunVal(v):
                if _VI not in _value_class(v, c):
                    raise ShapeViolation("parked function value is not inert")
                if _S2 in cls:
                    out.add(_S3)
            case Binder(_):
                if _S3 in cls:
                    out.add(_S3)
            case _:
                raise ShapeViolation(f"not a stack frame: {f!r}")
        if _S3 in out:
            out |= {_S1, _S2}
        if not out:
            raise ShapeViolation(
                f"frame {type(f).__name__} cannot extend a stack of class {sorted(cls)}"
            )
        cls = frozenset(out)
    return cls


def _check_shape(cfg: Config, c: _Caches) -> str:
    st = _stack_classes(cfg.stack, c)
    if cfg.mode == MODE_E:
        _wf_term(cfg.term, c)
        if _S1 in st:
            return "E-S1"
        raise ShapeViolation("E focus over a stack that is not an S1")
    if cfg.mode == MODE_C:
        vc = _value_class(cfg.value, c)
        if _S1 in st:
            return "C-S1-vw"
        if _S2 in st and _VI in vc:
            return "C-S2-vi"
        raise ShapeViolation("C focus/stack outside the two well-formed shapes")
    if cfg.mode == MODE_M:
        vc = _value_class(cfg.value, c)
        found_ok = (True, True) if cfg.found is None else _nf_class(cfg.found, c)
        if _S3 in st and found_ok[0]:
            return "M-n-S3-vw"
        if _S2 in st and _VI in vc and found_ok[1]:
            return "M-a-S2-vi"
        raise ShapeViolation("M focus/stack outside the two well-formed shapes")
    if cfg.mode == MODE_S:
        nrm, neu = _nf_class(cfg.term, c)
        if _S2 in st and neu:
            return "S-S2-a"
        if _S3 in st and nrm:
            return "S-S3-n"
        raise ShapeViolation("S focus is not normal for its stack class")
    raise ShapeViolation(f"unknown mode {cfg.mode!r}")


def check_shape(cfg: Config) -> str:
    """Classify a configuration among the seven reachable shapes, or raise
    ShapeViolation naming the first grammar production that fails."""
    return _check_shape(cfg, _Caches())


# --- potential functions ------------------------------------------------------


def _phi_term(t, c: _Caches) -> int:
    hit = c.phi_term.get(id(t))
    if hit is not None:
        return hit[1]
    match t:
        case Var(_) | Delim(_):
            out = 4
        case Lam(_, b):
            out = 4 + _phi_term(b, c)
        case App(f, a):
            out = 6 + _phi_term(f, c) + _phi_term(a, c)
        case _:
            raise TypeError(f"not a machine term: {t!r}")
    c.phi_term[id(t)] = (t, out)
    return out


def _phi_value(v, c: _Caches) -> int:
    hit = c.phi_value.get(id(v))
    if hit is not None:
        return hit[1]
    match v:
        case AVar(_):
            out = 1
        case Annot(_, _):
            # the inner value's work is accounted on the heap, not here
            out = 3
        case VLam(_, b):
            out = 3 + _phi_term(b, c)
        case VApp(f, a):
            out = 3 + _phi_value(f, c) + _phi_value(a, c)
        case _:
            raise TypeError(f"not a machine value: {v!r}")
    c.phi_value[id(v)] = (v, out)
    return out


def _phi_frame(f, c: _Caches) -> int:
    hit = c.phi_frame.get(id(f))
    if hit is not None:
        return hit[1]
    match f:
        case FunTerm(t):
            out = 5 + _phi_term(t, c)
        case ArgVal(v):
            out = 4 + _phi_value(v, c)
        case FunVal(v):
            out = 2 + _phi_value(v, c)
        case ArgNF(_) | Binder(_) | Memo(_):
            out = 1
        case _:
            raise TypeError(f"not a stack frame: {f!r}")
    c.phi_frame[id(f)] = (f, out)
    return out


def _phi_stack(stack, c: _Caches) -> int:
    return sum(_phi_frame(f, c) for f in stack)


def _locs_term(t, c: _Caches) -> frozenset:
    hit = c.locs_term.get(id(t))
    if hit is not None:
        return hit[1]
    match t:
        case Var(_):
            out = frozenset()
        case App(f, a):
            out = _locs_term(f, c) | _locs_term(a, c)
        case Lam(_, b):
            out = _locs_term(b, c)
        case Delim(v):
            out = _locs_value(v, c)
        case _:
            raise TypeError(f"not a machine term: {t!r}")
    c.locs_term[id(t)] = (t, out)
    return out


def _locs_value(v, c: _Caches) -> frozenset:
    hit = c.locs_value.get(id(v))
    if hit is not None:
        return hit[1]
    match v:
        case AVar(_):
            out = frozenset()
        case VApp(f, a):
            out = _locs_value(f, c) | _locs_value(a, c)
        case VLam(_, b):
            out = _locs_term(b, c)
        case Annot(loc, inner):
            c.phi_loc.setdefault(loc, _phi_value(inner, c))
            out = _locs_value(inner, c) | {loc}
        case _:
            raise TypeError(f"not a machine value: {v!r}")
    c.locs_value[id(v)] = (v, out)
    return out


def _phi_heap(cfg: Config, c: _Caches) -> int:
    """Potential still stored in annotated values: one summand per distinct
    location that occurs in the configuration, is not yet memoized, and is
    not currently being normalized (no memo frame for it on the stack)."""
    locs: set[int] = set()
    if cfg.mode in (MODE_E, MODE_S):
        locs |= _locs_term(cfg.term, c)
    else:
        locs |= _locs_value(cfg.value, c)
    for f in cfg.stack:
        match f:
            case FunTerm(t):
                locs |= _locs_term(t, c)
            case ArgVal(v) | FunVal(v):
                locs |= _locs_value(v, c)
            case _:
                pass
    memo_locs = {f.loc for f in cfg.stack if isinstance(f, Memo)}
    lookup_loc = -1
    if cfg.mode == MODE_M and cfg.found is None:
        lookup_loc = cfg.loc
        c.phi_loc.setdefault(lookup_loc, _phi_value(cfg.value, c))
        locs.add(lookup_loc)
    heap = cfg.heap
    total = 0
    for loc in locs:
        if loc == lookup_loc or (heap[loc] is None and loc not in memo_locs):
            total += c.phi_loc[loc]
    return total


def _iverson(cfg: Config) -> int:
    """9 exactly when the configuration is about to fire the beta rule."""
    if cfg.mode != MODE_C or not cfg.stack:
        return 0
    top = cfg.stack[-1]
    if isinstance(top, ArgVal) and isinstance(top.value, Annot) and isinstance(cfg.value, VLam):
        return 9
    return 0


@dataclass(frozen=True)
class PotentialBreakdown:
    phi_term: int
    phi_value: int
    phi_stack: int
    phi_heap: int
    iverson_discount: int
    total: int


def _phi_config(cfg: Config, c: _Caches) -> PotentialBreakdown:
    pt = pv = iv = 0
    if cfg.mode == MODE_E:
        pt = _phi_term(cfg.term, c)
    elif cfg.mode == MODE_C:
        pv = _phi_value(cfg.value, c)
        iv = _iverson(cfg)
    elif cfg.mode == MODE_M:
        pv = 2  # fixed cost of the pending memo lookup
    ps = _phi_stack(cfg.stack, c)
    ph = _phi_heap(cfg, c)
    return PotentialBreakdown(pt, pv, ps, ph, iv, pt + pv + ps + ph - iv)


def phi_term(t) -> int:
    return _phi_term(t, _Caches())


def phi_value(v) -> int:
    return _phi_value(v, _Caches())


def phi_stack(stack) -> int:
    return _phi_stack(stack, _Caches())


def phi_heap(cfg: Config) -> int:
    return _phi_heap(cfg, _Caches())


def phi_config(cfg: Config) -> PotentialBreakdown:
    return _phi_config(cfg, _Caches())


# --- trace audit ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    step: int
    rule: int | None
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"violation step={self.step} rule={self.rule} {self.kind}: {self.detail}"


@dataclass
class AuditReport:
    term: str
    steps: int = 0
    rule_counts: dict[int, int] = field(default_factory=dict)
    phi_initial: int = 0
    deltas: list[int] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)
    decode_checks: dict[str, int] = field(default_factory=dict)
    trace_bound: int = 0
    trace_margin: int = 0
    bypass_checked: bool = False
    decode_checked: bool = True
    fuel_exhausted: bool = False

    @property
    def count7(self) -> int:
        return self.rule_counts.get(7, 0)

    @property
    def beta_count(self) -> int:
        return self.rule_counts.get(subst_machine.BETA_RULE, 0)


def _short(t: Term, limit: int = 160) -> str:
    """Bounded rendering for error messages; never walks more of a shared
    term than the character budget allows."""
    parts: list[str] = []
    budget = [limit]

    def emit(s: str) -> bool:
        parts.append(s)
        budget[0] -= len(s)
        return budget[0] > 0

    def go(t, pos: int) -> bool:
        if budget[0] <= 0:
            return emit("...")
        match t:
            case Var(x):
                return emit(str(x))
            case Lam(x, b):
                if pos > 0:
                    emit("(")
                ok = emit(f"\\{x}. ") and go(b, 0)
                if pos > 0:
                    emit(")")
                return ok
            case App(f, a):
                if pos > 1:
                    emit("(")
                ok = go(f, 1) and emit(" ") and go(a, 2)
                if pos > 1:
                    emit(")")
                return ok
        return emit(repr(t))

    go(t, 0)
    return "".join(parts)


def audit_trace(
    t: Term,
    fuel: int = DEFAULT_FUEL,
    bypass_limit: int = BYPASS_LIMIT,
) -> AuditReport:
    """Run the substitution machine on t, asserting after every transition:

    - the configuration is well-shaped;
    - the potential strictly decreases (rule 7: increases by less than the
      initial term's potential);
    - the trace so far is within (1 + count of rule 7) * initial potential;
    - every abstraction value focused on stays below the initial potential;
    - the decoding is unchanged by administrative rules, steps by exactly
      one contraction of the reference strategy on the beta rule, is
      alpha-invariant under the fresh-renaming rule, and is reachable by
      reference reduction across memo hits (checked while the reference
      normalization stays within bypass_limit steps).

    Decode-based checks need a closed term; on open input they are skipped
    and the report says so.  The first violation aborts with an
    AuditViolation carrying the step, rule, and both configurations; fuel
    exhaustion raises FuelError carrying the partial report (a prefix of a
    diverging run is still a valid trace and is fully checked).
    """
    caches = _Caches()
    closed = is_closed(t)
    report = AuditReport(term=_short(t), decode_checked=closed)
    report.decode_checks = {"invariant": 0, "beta": 0, "alpha": 0, "bypass": 0}

    cfg = subst_machine.load(t)
    _check_shape(cfg, caches)
    phi_prev = _phi_config(cfg, caches).total
    phi0 = _phi_term(t, caches)
    report.phi_initial = phi0
    if phi_prev != phi0:
        raise AuditViolation(f"loaded potential {phi_prev} differs from term potential {phi0}")
    dec_prev = _decode_config(cfg, caches) if closed else None
    bypass_nf: Term | None = None
    if closed:
        try:
            bypass_nf, _ = reduction.normalize(t, fuel=bypass_limit)
            report.bypass_checked = True
        except FuelError:
            bypass_nf = None

    prev_repr = repr(cfg)
    count7 = 0
    steps = 0

    def fail(rule: int | None, kind: str, detail: str):
        v = Violation(steps, rule, kind, f"{detail} [before {prev_repr}, after {cfg!r}]")
        report.violations.append(v)
        raise AuditViolation(str(v), violation=v, report=report)

    while not cfg.is_final:
        if steps >= fuel:
            report.fuel_exhausted = True
            raise FuelError(f"audit exceeded {fuel} transitions", steps=steps, report=report)
        prev_repr = repr(cfg)
        try:
            rule = subst_machine.step(cfg)
        except MachineStuck as exc:
            fail(None, "stuck", str(exc))
        steps += 1
        report.steps = steps
        report.rule_counts[rule] = report.rule_counts.get(rule, 0) + 1
        if rule == 7:
            count7 += 1

        try:
            _check_shape(cfg, caches)
        except ShapeViolation as exc:
            fail(rule, "shape", str(exc))

        phi_now = _phi_config(cfg, caches).total
        delta = phi_now - phi_prev
        report.deltas.append(delta)
        if rule == 7:
            if delta >= phi0:
                fail(rule, "potential-increase", f"rule 7 raised the potential by {delta} >= {phi0}")
        elif delta >= 0:
            fail(rule, "potential-decrease", f"potential did not drop (delta {delta})")
        if phi_now < 0:
            fail(rule, "potential-negative", f"potential {phi_now} below zero")
        bound = (count7 + 1) * phi0
        if steps > bound:
            fail(rule, "trace-bound", f"{steps} steps exceeds ({count7}+1)*{phi0}")
        if cfg.mode == MODE_C and isinstance(cfg.value, VLam):
            pv = _phi_value(cfg.value, caches)
            if pv >= phi0:
                fail(rule, "subterm", f"abstraction value potential {pv} >= {phi0}")

        if closed:
            dec_now = _decode_config(cfg, caches)
            if rule not in (5, 9, 13):
                report.decode_checks["invariant"] += 1
                if dec_now != dec_prev:
                    fail(rule, "decode-invariance", f"decoding changed: {_short(dec_now)}")
            elif rule == 5:
                report.decode_checks["beta"] += 1
                expected = reduction.step(dec_prev)
                if expected is None or expected != dec_now:
                    fail(rule, "beta-decode", "beta step does not match the reference contraction")
            elif rule == 9:
                report.decode_checks["alpha"] += 1
                if not alpha_eq(dec_prev, dec_now):
                    fail(rule, "alpha-decode", "renaming step changed the term beyond alpha")
            elif rule == 13 and bypass_nf is not None:
                report.decode_checks["bypass"] += 1
                u = dec_prev
                for _ in range(bypass_limit + 1):
                    if alpha_eq(u, dec_now):
                        break
                    u = reduction.step(u)
                    if u is None:
                        fail(rule, "bypass-decode", "memo hit skipped past the reference reduction")
                else:
                    fail(rule, "bypass-decode", "memo hit not reached within the bypass limit")
            dec_prev = dec_now
        phi_prev = phi_now

    report.trace_bound = (count7 + 1) * phi0
    report.trace_margin = report.trace_bound - steps
    return report


# --- lockstep comparison of the two machines -------------------------------------


def _memo_eq(a, b, memo: dict) -> bool:
    """Structural equality with pair memoization, so shared substructure is
    compared once per pair instead of once per unfolded occurrence."""
    if a is b:
        return True
    if type(a) is not type(b):
        return False
    key = (id(a), id(b))
    hit = memo.get(key)
    if hit is not None:
        return hit[2]
    if isinstance(a, (int, str, Ident)) or a is None:
        res = a == b
    else:
        fields = getattr(a, "__dataclass_fields__", None)
        if fields is None:
            res = a == b
        else:
            res = all(_memo_eq(getattr(a, f), getattr(b, f), memo) for f in fields)
    memo[key] = (a, b, res)
    return res


def bisim_check(t: Term, fuel: int = DEFAULT_FUEL) -> bool:
    """Run both machines in lockstep on a closed term; True iff they fire
    the same rule at every step and translating the environment machine's
    configuration keeps matching the substitution machine's.

    Equality is checked on the parts each step can change (focus, touched
    frames, counters, written heap entries) plus the full stacks and heaps
    at the end; unchanged deeper structure stays equal by induction.
    """
    if not is_closed(t):
        raise ValueError("lockstep comparison is defined for closed terms")
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    ecfg = env_machine.load(t)
    scfg = subst_machine.load(t)
    tr = env_machine.Translator()
    eq_memo: dict = {}

    def translated_matches() -> bool:
        if ecfg.mode != scfg.mode or ecfg.counter != scfg.counter:
            return False
        if len(ecfg.heap) != len(scfg.heap) or len(ecfg.stack) != len(scfg.stack):
            return False
        if ecfg.mode == MODE_E:
            focus_e = tr.term(ecfg.env, ecfg.term)
            if not _memo_eq(focus_e, scfg.term, eq_memo):
                return False
        elif ecfg.mode == MODE_S:
            if not _memo_eq(ecfg.term, scfg.term, eq_memo):
                return False
        if (ecfg.value is None) != (scfg.value is None):
            return False
        if ecfg.value is not None:
            if not _memo_eq(tr.value(ecfg.value), scfg.value, eq_memo):
                return False
        if ecfg.mode == MODE_M:
            if ecfg.loc != scfg.loc or not _memo_eq(ecfg.found, scfg.found, eq_memo):
                return False
        depth = len(ecfg.stack)
        for i in range(max(depth - 2, 0), depth):
            if not _memo_eq(tr.frame(ecfg.stack[i]), scfg.stack[i], eq_memo):
                return False
        return True

    steps = 0
    while True:
        if ecfg.is_final != scfg.is_final:
            return False
        if ecfg.is_final:
            break
        if steps >= fuel:
            raise FuelError(f"lockstep run exceeded {fuel} transitions", steps=steps)
        rule_e = env_machine.step(ecfg)
        rule_s = subst_machine.step(scfg)
        steps += 1
        if rule_e != rule_s:
            return False
        if not translated_matches():
            return False
    # final full comparison: stacks are empty, compare results and heaps
    if not _memo_eq(ecfg.term, scfg.term, eq_memo):
        return False
    if len(ecfg.heap) != len(scfg.heap):
        return False
    return all(_memo_eq(a, b, eq_memo) for a, b in zip(ecfg.heap, scfg.heap))


def translate_config(cfg) -> Config:
    """Re-export of the environment machine's configuration translation."""
    return env_machine.translate_config(cfg)


def config_equal(a: Config, b: Config) -> bool:
    """Structural equality of two configurations, sharing-aware."""
    memo: dict = {}
    return (
        a.mode == b.mode
        and a.counter == b.counter
        and a.loc == b.loc
        and _memo_eq(a.term, b.term, memo)
        and _memo_eq(a.value, b.value, memo)
        and _memo_eq(a.found, b.found, memo)
        and len(a.stack) == len(b.stack)
        and all(_memo_eq(x, y, memo) for x, y in zip(a.stack, b.stack))
        and len(a.heap) == len(b.heap)
        and all(_memo_eq(x, y, memo) for x, y in zip(a.heap, b.heap))
    )


# --- step traces -------------------------------------------------------------


def emit_trace_csv(t: Term, fuel: int = DEFAULT_FUEL) -> list[tuple]:
    """One row per transition: (step, rule, mode, phi_total, phi_heap,
    stack_depth, heap_size) of the configuration the transition produced."""
    caches = _Caches()
    rows: list[tuple] = []

    def hook(i: int, rule: int, mode: str, cfg: Config):
        b = _phi_config(cfg, caches)
        rows.append((i, rule, mode, b.total, b.phi_heap, len(cfg.stack), len(cfg.heap)))

    subst_machine.run(t, fuel=fuel, hook=hook)
    return rows
