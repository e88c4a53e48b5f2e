"""Two-sided lattice sequences, the discrete Laplacian and the canonical
initial conditions of the chain.

All state is kept in displacement coordinates q_k; the equilibrium offsets
never appear. Initial velocities are always zero.
"""

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InsufficientSupportError",
    "InitialCondition",
    "LatticeSlice",
    "RULES",
    "evaluate_ic",
    "discrete_laplacian",
    "first_difference",
    "sample_slice",
    "clamped_q_delta",
    "parse_ic",
]

RULES = ("sign", "spike", "alternating", "log_decay", "sampled", "custom",
         "constant")

DEFAULT_WINDOW = 1024
LOG_DECAY_WINDOW = 1 << 18

# names accepted by ``sampled`` expressions
_EXPR_NAMESPACE = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "log1p", "sqrt", "tanh",
                 "arctan", "cosh", "sinh", "abs", "sign", "pi", "e")
}


class InsufficientSupportError(ValueError):
    """The slice is too short for the requested stencil or operation."""


@dataclass(frozen=True)
class LatticeSlice:
    """A finite window of a lattice sequence: ``values[i]`` sits at index
    ``offset + i``."""

    offset: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("LatticeSlice values must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ValueError("LatticeSlice values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    @property
    def indices(self):
        return np.arange(self.offset, self.offset + len(self.values))

    @property
    def last(self):
        return self.offset + len(self.values) - 1

    def at(self, k):
        """Value at index ``k`` (zero outside the window)."""
        k = np.asarray(k)
        i = k - self.offset
        inside = (i >= 0) & (i < len(self.values))
        out = np.where(inside, self.values[np.clip(i, 0, len(self.values) - 1)], 0.0)
        return out if out.ndim else float(out)

    def restrict(self, lo, hi):
        lo, hi = max(lo, self.offset), min(hi, self.last)
        return LatticeSlice(lo, self.values[lo - self.offset:hi - self.offset + 1])

    def trimmed(self):
        """Smallest slice holding every nonzero entry (a single zero if none)."""
        nz = np.flatnonzero(self.values)
        if nz.size == 0:
            return LatticeSlice(0, [0.0])
        return LatticeSlice(self.offset + nz[0], self.values[nz[0]:nz[-1] + 1])

    def __add__(self, other):
        lo = min(self.offset, other.offset)
        hi = max(self.last, other.last)
        k = np.arange(lo, hi + 1)
        return LatticeSlice(lo, self.at(k) + other.at(k))

    def scaled(self, alpha):
        return LatticeSlice(self.offset, alpha * self.values)


@dataclass(frozen=True)
class InitialCondition:
    """Closed-form rule for q(0) plus the half-width of its evaluation window.

    ``params`` depends on the rule: ``b`` for ``spike``, ``value`` for
    ``constant``, ``table`` (index -> value) for ``custom`` and either
    ``expr`` (a numpy expression in ``x``) or ``func`` (a callable) for
    ``sampled``.
    """

    rule: str
    params: dict = field(default_factory=dict)
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        rule = self.rule.replace("-", "_").lower()
        if rule not in RULES:
            raise ValueError(f"unknown initial-condition rule {self.rule!r}")
        params = dict(self.params)
        if rule == "custom":
            params["table"] = {int(k): float(v)
                               for k, v in dict(params.get("table", {})).items()}
        if rule == "spike":
            params["b"] = float(params.get("b", 0.0))
        if rule == "constant":
            params["value"] = float(params.get("value", 0.0))
        if rule == "sampled" and "func" not in params and "expr" not in params:
            raise ValueError("sampled initial condition needs 'expr' or 'func'")
        if self.window < 2:
            raise ValueError("window half-width must be at least 2")
        object.__setattr__(self, "rule", rule)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "window", int(self.window))

    # constructors -----------------------------------------------------
    @classmethod
    def sign(cls, window=DEFAULT_WINDOW):
        return cls("sign", {}, window)

    @classmethod
    def spike(cls, b, window=DEFAULT_WINDOW):
        return cls("spike", {"b": b}, window)

    @classmethod
    def alternating(cls, window=DEFAULT_WINDOW):
        return cls("alternating", {}, window)

    @classmethod
    def log_decay(cls, window=LOG_DECAY_WINDOW):
        return cls("log_decay", {}, window)

    @classmethod
    def constant(cls, value, window=DEFAULT_WINDOW):
        return cls("constant", {"value": value}, window)

    @classmethod
    def custom(cls, table, window=None):
        table = {int(k): float(v) for k, v in dict(table).items()}
        if window is None:
            reach = max((abs(k) for k in table), default=0)
            window = max(DEFAULT_WINDOW, reach + 2)
        return cls("custom", {"table": table}, window)

    @classmethod
    def sampled(cls, f, window=DEFAULT_WINDOW):
        key = "expr" if isinstance(f, str) else "func"
        return cls("sampled", {key: f}, window)

    # evaluation -------------------------------------------------------
    @property
    def finite_delta_support(self):
        """True when q^Delta is known to vanish outside a bounded set."""
        return self.rule in ("sign", "spike", "constant", "custom")

    def values(self, k):
        """Vectorised rule evaluation at integer indices ``k``."""
        k = np.asarray(k, dtype=np.int64)
        rule, p = self.rule, self.params
        if rule == "sign":
            return np.sign(k).astype(float)
        if rule == "spike":
            return np.where(k == 0, p["b"], 1.0)
        if rule == "alternating":
            return np.where(k % 2 == 0, 1.0, -1.0)
        if rule == "constant":
            return np.full(k.shape, p["value"])
        if rule == "log_decay":
            a = np.abs(k).astype(float)
            out = np.zeros(k.shape)
            big = a > 1
            la = np.log(a[big])
            out[big] = np.sin(np.log(la)) / la ** 2
            return out
        if rule == "custom":
            table = p["table"]
            return np.array([table.get(int(i), 0.0) for i in k.ravel()],
                            dtype=float).reshape(k.shape)
        f = p.get("func")
        if f is None:
            expr = p["expr"]
            code = compile(expr, "<sampled>", "eval")
            for name in code.co_names:
                if name not in _EXPR_NAMESPACE and name != "x":
                    raise ValueError(f"name {name!r} not allowed in expression")

            def f(x, _code=code):
                return eval(_code, {"__builtins__": {}}, dict(_EXPR_NAMESPACE, x=x))
        out = np.asarray(f(k.astype(float)), dtype=float)
        return np.broadcast_to(out, k.shape).copy()

    # serialisation ----------------------------------------------------
    def to_dict(self):
        params = dict(self.params)
        if "func" in params:
            raise TypeError("an initial condition built from a Python callable "
                            "cannot be serialised; use an 'expr' string")
        if "table" in params:
            params["table"] = {str(k): v for k, v in sorted(params["table"].items())}
        return {"rule": self.rule, "params": params, "window": self.window}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        rule = d.pop("rule")
        window = d.pop("window", None)
        params = dict(d.pop("params", {}))
        params.update(d)  # flat form: {"rule": "custom", "table": {...}}
        if rule == "custom":
            return cls.custom(params.get("table", {}), window)
        if window is None:
            window = LOG_DECAY_WINDOW if rule.replace("-", "_") == "log_decay" else DEFAULT_WINDOW
        return cls(rule, params, window)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        shown = {k: v for k, v in self.params.items() if k != "func"}
        return f"InitialCondition({self.rule!r}, {shown}, window={self.window})"


def evaluate_ic(ic, k):
    """Value of the initial condition at integer index ``k``."""
    return float(ic.values(np.asarray([k]))[0])


def sample_slice(ic, lo=None, hi=None):
    """The initial condition on indices lo..hi (default: its window)."""
    lo = -ic.window if lo is None else lo
    hi = ic.window if hi is None else hi
    k = np.arange(lo, hi + 1)
    return LatticeSlice(lo, ic.values(k))


def discrete_laplacian(q):
    """q^Delta = -Delta q, i.e. 2 q_k - q_{k+1} - q_{k-1}, on the interior of
    the slice (two entries shorter)."""
    if len(q) < 3:
        raise InsufficientSupportError(
            f"discrete Laplacian needs at least 3 entries, got {len(q)}")
    v = q.values
    return LatticeSlice(q.offset + 1, 2.0 * v[1:-1] - v[2:] - v[:-2])


def first_difference(q):
    """delta_k = q_k - q_{k-1} on indices offset+1 .. last."""
    if len(q) < 2:
        raise InsufficientSupportError(
            f"first difference needs at least 2 entries, got {len(q)}")
    return LatticeSlice(q.offset + 1, np.diff(q.values))


def clamped_q_delta(ic, window=None):
    """q^Delta on -K..K of the sequence that equals q inside the window and is
    continued by its edge values outside.

    The continuation makes q^Delta finitely supported with zero sum, so it is
    the exact Laplacian of a bounded sequence agreeing with q on the window.
    """
    K = ic.window if window is None else int(window)
    q = ic.values(np.arange(-K, K + 1))
    padded = np.concatenate([[q[0]], q, [q[-1]]])
    return LatticeSlice(-K, 2.0 * padded[1:-1] - padded[2:] - padded[:-2])


_NAMED = {"sign": "sign", "alternating": "alternating", "log-decay": "log_decay",
          "log_decay": "log_decay", "logdecay": "log_decay"}


def parse_ic(text):
    """Build an initial condition from a CLI-style string.

    Accepts bare names (``sign``, ``alternating``, ``log-decay``),
    ``spike:<b>``, ``constant:<c>``, ``sampled:<expr>`` or a JSON object.
    """
    text = text.strip()
    if text.startswith("{"):
        return InitialCondition.from_json(text)
    name, _, arg = text.partition(":")
    name = name.lower()
    if name in _NAMED and not arg:
        return InitialCondition.from_dict({"rule": _NAMED[name]})
    if name == "spike":
        return InitialCondition.spike(float(arg) if arg else 0.0)
    if name == "constant":
        return InitialCondition.constant(float(arg) if arg else 0.0)
    if name == "sampled" and arg:
        return InitialCondition.sampled(arg)
    raise ValueError(f"cannot parse initial condition {text!r}")
