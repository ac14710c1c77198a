"""Instance files: a header, an optional coefficient line, then labeled examples.

::

    # comments and blank lines are ignored
    q n eta eta_bound seed
    c_0 ... c_{n-1}            (absent in challenge instances)
    a_0 ... a_{n-1} b          (one line per example)

The coefficient line is recognised by having n entries instead of n + 1.
"""

from __future__ import annotations

import io
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from ..field import Field, make_field
from ..linmodel import LinearFn, sample_sparse_linear
from ..oracle import ExampleOracle, ReplaySource, planted_oracle
from ..seeding import derive_seed, make_rng


class InstanceParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int, path: str | None = None):
        self.line, self.col, self.path = line, col, path
        where = f"{path}:" if path else "line "
        super().__init__(f"{where}{line}:{col}: {msg}")


@dataclass
class Instance:
    field: Field
    eta: float
    eta_bound: float
    seed: int
    a: np.ndarray
    b: np.ndarray
    target: LinearFn | None = None

    @property
    def n(self) -> int:
        return self.a.shape[1]

    @property
    def is_open(self) -> bool:
        return self.target is not None

    def sealed(self) -> "Instance":
        """Copy without the coefficient line."""
        return Instance(self.field, self.eta, self.eta_bound, self.seed, self.a, self.b)

    def oracle(self, *, reveal: bool = False) -> ExampleOracle:
        """Replay oracle over the examples; ``reveal`` exposes the target (cheat runs only)."""
        target = self.target if reveal else None
        src = ReplaySource(self.field, self.a, self.b, target, self.eta if reveal else None)
        return ExampleOracle(src, derive_seed(self.seed, "replay"), self.eta_bound)

    def dumps(self) -> str:
        out = io.StringIO()
        out.write(f"{self.field.q} {self.n} {self.eta!r} {self.eta_bound!r} {self.seed}\n")
        if self.target is not None:
            out.write(" ".join(map(str, self.target.coeffs.tolist())) + "\n")
        rows = np.column_stack([self.a, self.b])
        np.savetxt(out, rows, fmt="%d", delimiter=" ")
        return out.getvalue()


def _ints(tokens, lineno, starts, path):
    vals = []
    for tok, col in zip(tokens, starts):
        try:
            vals.append(int(tok))
        except ValueError:
            raise InstanceParseError(f"expected an integer, got {tok!r}", lineno, col,
                                     path) from None
    return vals


def _split(line: str):
    tokens, starts, i = [], [], 0
    for tok in line.split():
        i = line.index(tok, i)
        tokens.append(tok)
        starts.append(i + 1)
        i += len(tok)
    return tokens, starts


def loads(text: str, path: str | None = None) -> Instance:
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines())
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise InstanceParseError("empty instance", 1, 1, path)
    lineno, header = lines[0]
    tokens, starts = _split(header)
    if len(tokens) != 5:
        raise InstanceParseError(f"header needs 5 fields (q n eta eta_bound seed), "
                                 f"got {len(tokens)}", lineno, 1, path)
    q, n = _ints(tokens[:2], lineno, starts[:2], path)
    try:
        eta, eta_bound = float(tokens[2]), float(tokens[3])
    except ValueError:
        raise InstanceParseError("noise rates must be numbers", lineno, starts[2], path) from None
    (seed,) = _ints(tokens[4:], lineno, starts[4:], path)
    try:
        ctx = make_field(q)
    except ValueError as e:
        raise InstanceParseError(str(e), lineno, starts[0], path) from None
    if n < 1:
        raise InstanceParseError("n must be >= 1", lineno, starts[1], path)

    target = None
    rows = []
    for idx, (lineno, ln) in enumerate(lines[1:]):
        tokens, starts = _split(ln)
        vals = _ints(tokens, lineno, starts, path)
        if idx == 0 and len(vals) == n:
            target = vals
            continue
        if len(vals) != n + 1:
            col = starts[min(len(starts), n + 1) - 1] if starts else 1
            raise InstanceParseError(f"example needs {n + 1} entries, got {len(vals)}",
                                     lineno, col, path)
        for v, col in zip(vals, starts):
            if not 0 <= v < q:
                raise InstanceParseError(f"value {v} outside [0, {q})", lineno, col, path)
        rows.append(vals)
    arr = np.array(rows, dtype=np.int64).reshape(-1, n + 1)
    tgt = None if target is None else LinearFn(ctx, target)
    return Instance(ctx, eta, eta_bound, seed, arr[:, :n], arr[:, n], tgt)


def load(path: str) -> Instance:
    with open(path) as fh:
        return loads(fh.read(), path)


def atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def planted_target(cfg) -> LinearFn:
    ctx = make_field(cfg.q)
    rng = make_rng(derive_seed(cfg.seed, cfg.seed_label, "target"))
    return sample_sparse_linear(ctx, cfg.n, cfg.d, rng)


def generate(cfg) -> Instance:
    """Planted target of sparsity ``cfg.d`` with ``cfg.examples`` noisy examples."""
    f = planted_target(cfg)
    src = planted_oracle(f, cfg.eta, cfg.eta_bound, derive_seed(cfg.seed, cfg.seed_label, "oracle"))
    a, b = src.draw(cfg.examples)
    return Instance(f.field, cfg.eta, cfg.eta_bound, cfg.seed, a, b, f)
