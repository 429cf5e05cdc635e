"""Monte Carlo BER/BLER estimation over BPSK-AWGN.

Randomness is counter based.  Trial ``i`` of Eb/N0 point ``p`` draws from a
Philox stream keyed by ``(p << 64) | seed`` with its counter starting at
``i << 128``, so every trial sees the same noise no matter which worker runs
it.  Gaussians come from a fixed Box-Muller transform of 53-bit uniforms.

Trials are grouped into fixed-size batches.  Batches are decoded in waves of
``workers`` and merged strictly in batch order; the stopping rule is checked
after each merged batch and later batches of the wave are discarded.  The
outcome is therefore independent of the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import alist
from ._version import __version__
from .decoders import DecoderGraph, decode_batch
from .errors import ConfigInvalidError, FormatError, InvalidRateError
from .gf2 import LinearCode

log = logging.getLogger(__name__)

CSV_HEADER = ("ebno_db", "trials", "bit_errors", "block_errors", "ber", "bler", "mean_iters")
_U53 = 1.0 / 9007199254740992.0  # 2**-53


# ------------------------------------------------------------------ channel

def trial_stream(seed: int, point: int, trial: int) -> np.random.Philox:
    if not 0 <= seed < 2**64:
        raise ConfigInvalidError("seed must lie in [0, 2**64)")
    return np.random.Philox(key=(int(point) << 64) | int(seed), counter=int(trial) << 128)


def _uniforms(bitgen: np.random.BitGenerator, size: int) -> np.ndarray:
    raw = bitgen.random_raw(size)
    return (raw >> np.uint64(11)).astype(np.float64) * _U53


def gaussian(bitgen: np.random.BitGenerator, size: int) -> np.ndarray:
    """Standard normals by Box-Muller; ``u1`` in (0, 1], ``u2`` in [0, 1)."""
    pairs = (size + 1) // 2
    u = _uniforms(bitgen, 2 * pairs)
    u1 = 1.0 - u[0::2]
    u2 = u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(2.0 * math.pi * u2)
    z[1::2] = r * np.sin(2.0 * math.pi * u2)
    return z[:size]


def noise_variance(ebno_db: float, rate: float) -> float:
    if not 0.0 < rate <= 1.0:
        raise InvalidRateError(f"rate must lie in (0, 1], got {rate}")
    if not math.isfinite(ebno_db):
        raise ConfigInvalidError("Eb/N0 must be finite")
    return 1.0 / (2.0 * rate * 10.0 ** (ebno_db / 10.0))


def awgn_bpsk_llr(codeword, ebno_db: float, rate: float, stream) -> np.ndarray:
    """Channel LLRs ``2 y / sigma**2`` for BPSK (0 -> +1) over AWGN.

    ``stream`` is a numpy bit generator or an integer seed.
    """
    sigma2 = noise_variance(ebno_db, rate)
    c = np.asarray(codeword, dtype=np.uint8).ravel()
    bitgen = stream if isinstance(stream, np.random.BitGenerator) else np.random.Philox(key=int(stream))
    y = (1.0 - 2.0 * c) + math.sqrt(sigma2) * gaussian(bitgen, c.size)
    return 2.0 * y / sigma2


# ------------------------------------------------------------------ config

@dataclass(frozen=True)
class SimConfig:
    code: str = ""
    ebno_db: tuple = ()
    max_iter: int = 50
    decoder: str = "msa"
    attenuation: float = 1.0
    min_block_errors: int = 100
    max_trials: int = 100_000_000
    seed: int = 0
    workers: int = 1
    batch_size: int = 256
    random_codeword: bool = False
    clamp: float = 30.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "ebno_db", tuple(float(x) for x in self.ebno_db))
        self.validate()

    def validate(self) -> None:
        g = self.ebno_db
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ConfigInvalidError("Eb/N0 grid must be strictly increasing")
        if any(not math.isfinite(x) for x in g):
            raise ConfigInvalidError("Eb/N0 values must be finite")
        if self.min_block_errors < 1:
            raise ConfigInvalidError("min_block_errors must be at least 1")
        if self.max_trials < 1:
            raise ConfigInvalidError("max_trials must be at least 1")
        if self.max_iter < 1:
            raise ConfigInvalidError("max_iter must be at least 1")
        if self.decoder not in ("msa", "spa"):
            raise ConfigInvalidError("decoder must be 'msa' or 'spa'")
        if not 0.0 < self.attenuation <= 1.0:
            raise ConfigInvalidError("attenuation must lie in (0, 1]")
        if self.workers < 1 or self.batch_size < 1:
            raise ConfigInvalidError("workers and batch_size must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalidError("seed must lie in [0, 2**64)")

    def replace(self, **kw) -> "SimConfig":
        return SimConfig(**{**asdict(self), **kw})

    def to_text(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "ebno_db":
                v = ", ".join(repr(x) for x in v)
            out.append(f"{f.name} = {v}")
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str, base_dir: str | Path | None = None) -> "SimConfig":
        """Parse ``key = value`` lines; ``#`` starts a comment.

        ``ebno_db`` takes a comma list or an inclusive ``start:stop:step`` range.
        A relative ``code`` path is resolved against ``base_dir``.
        """
        kinds = {f.name: f.type for f in fields(cls)}
        kw: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigInvalidError(f"line {lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in kinds:
                raise ConfigInvalidError(f"line {lineno}: unknown key {key!r}")
            try:
                kw[key] = _parse_value(key, value)
            except ValueError as exc:
                raise ConfigInvalidError(f"line {lineno}: bad value for {key}: {value!r}") from exc
        if base_dir is not None and kw.get("code") and not Path(kw["code"]).is_absolute():
            kw["code"] = str(Path(base_dir) / kw["code"])
        return cls(**kw)

    @classmethod
    def load(cls, path: str | Path) -> "SimConfig":
        p = Path(path)
        return cls.from_text(p.read_text(), base_dir=p.parent)


def parse_grid(value: str) -> tuple[float, ...]:
    value = value.strip()
    if not value:
        return ()
    if ":" in value:
        start, stop, step = (float(x) for x in value.split(":"))
        if step <= 0:
            raise ValueError("step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + k * step, 12) for k in range(count))
    return tuple(float(x) for x in value.split(","))


def _parse_value(key: str, value: str):
    if key == "ebno_db":
        return parse_grid(value)
    if key in ("code", "decoder"):
        return value
    if key == "random_codeword":
        low = value.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(value)
        return low in ("true", "1", "yes")
    if key in ("attenuation", "clamp"):
        return float(value)
    return int(float(value)) if key == "max_trials" and "e" in value.lower() else int(value)


# ------------------------------------------------------------------ results

@dataclass(frozen=True)
class PointResult:
    ebno_db: float
    trials: int
    bit_errors: int
    block_errors: int
    total_iters: int
    wall_time: float = field(default=0.0, compare=False)
    bit_errors_sq: int = 0  # sum over frames of (bit errors in the frame) ** 2

    def ber(self, n: int) -> float:
        return self.bit_errors / (self.trials * n) if self.trials else 0.0

    def ber_stderr(self, n: int) -> float:
        """Standard error of :meth:`ber` with frames as the independent unit.

        Bit errors inside one frame are strongly correlated, so the binomial
        formula over ``trials * n`` bits would understate the spread.
        """
        if self.trials < 2:
            return math.inf
        mean = self.bit_errors / self.trials
        var = max(self.bit_errors_sq / self.trials - mean * mean, 0.0) * self.trials / (self.trials - 1)
        return math.sqrt(var / self.trials) / n

    @property
    def bler(self) -> float:
        return self.block_errors / self.trials if self.trials else 0.0

    @property
    def mean_iters(self) -> float:
        return self.total_iters / self.trials if self.trials else 0.0


@dataclass(frozen=True)
class SimResult:
    config: SimConfig
    n: int
    k: int
    points: tuple[PointResult, ...]

    @property
    def rate(self) -> float:
        return self.k / self.n

    def rows(self) -> list[tuple]:
        return [
            (p.ebno_db, p.trials, p.bit_errors, p.block_errors, p.ber(self.n), p.bler, p.mean_iters)
            for p in self.points
        ]

    def to_dict(self) -> dict:
        return {
            "version": __version__,
            "config": asdict(self.config),
            "n": self.n,
            "k": self.k,
            "points": [
                dict(zip(CSV_HEADER, row), ber_stderr=p.ber_stderr(self.n), wall_time=p.wall_time)
                for row, p in zip(self.rows(), self.points)
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def csv_text(result: SimResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in result.rows():
        w.writerow([repr(float(row[0])), row[1], row[2], row[3], repr(float(row[4])), repr(float(row[5])), repr(float(row[6]))])
    return buf.getvalue()


def emit_csv(result: SimResult, path: str | Path) -> None:
    Path(path).write_text(csv_text(result), encoding="ascii")


def parse_csv(text: str) -> list[dict]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise FormatError("missing or unexpected CSV header")
    out = []
    for r in rows[1:]:
        if len(r) != len(CSV_HEADER):
            raise FormatError(f"row has {len(r)} fields")
        out.append(
            {
                "ebno_db": float(r[0]),
                "trials": int(r[1]),
                "bit_errors": int(r[2]),
                "block_errors": int(r[3]),
                "ber": float(r[4]),
                "bler": float(r[5]),
                "mean_iters": float(r[6]),
            }
        )
    return out


# ------------------------------------------------------------------ engine

@dataclass(frozen=True)
class _Batch:
    trials: int
    bit_errors: int
    block_errors: int
    total_iters: int
    bit_errors_sq: int = 0


def _run_batch(ctx: dict, point: int, ebno: float, first: int, count: int) -> _Batch:
    cfg: SimConfig = ctx["config"]
    code: LinearCode = ctx["code"]
    n = code.n
    sigma2 = noise_variance(ebno, code.rate)
    sigma = math.sqrt(sigma2)
    llrs = np.empty((count, n))
    sent = np.zeros((count, n), dtype=np.uint8)
    for b in range(count):
        bg = trial_stream(cfg.seed, point, first + b)
        noise = gaussian(bg, n)
        if cfg.random_codeword:
            words = bg.random_raw((code.k + 63) // 64).astype("<u8")
            msg = np.unpackbits(words.view(np.uint8), bitorder="little")[: code.k]
            sent[b] = code.encode(msg)
        llrs[b] = 2.0 * ((1.0 - 2.0 * sent[b]) + sigma * noise) / sigma2
    words, _, iters = decode_batch(ctx["graph"], llrs, cfg.max_iter, cfg.decoder, cfg.attenuation, cfg.clamp)
    errs = np.count_nonzero(words != sent, axis=1)
    errs = errs.astype(np.int64)
    return _Batch(count, int(errs.sum()), int(np.count_nonzero(errs)), int(iters.sum()), int((errs * errs).sum()))


def _load_code(config: SimConfig, code) -> LinearCode:
    if isinstance(code, LinearCode):
        return code
    if code is None:
        if not config.code:
            raise ConfigInvalidError("no code given")
        code = alist.read(config.code)
    return LinearCode.from_parity_matrix(code)


def run_monte_carlo(config: SimConfig, code=None) -> SimResult:
    """Simulate every Eb/N0 point until ``min_block_errors`` or ``max_trials`` is reached."""
    config.validate()
    lc = _load_code(config, code)
    if lc.k == 0:
        raise InvalidRateError("code has dimension 0")
    ctx = {"config": config, "code": lc, "graph": DecoderGraph.from_matrix(lc.H)}
    log.info("qcpag %s simulate %s", __version__, json.dumps(asdict(config)))
    points = []
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        for p, ebno in enumerate(config.ebno_db):
            start = time.perf_counter()
            acc = _Batch(0, 0, 0, 0, 0)
            next_trial = 0
            done = False
            while not done:
                wave = []
                for _ in range(config.workers):
                    if next_trial >= config.max_trials:
                        break
                    count = min(config.batch_size, config.max_trials - next_trial)
                    wave.append(pool.submit(_run_batch, ctx, p, ebno, next_trial, count))
                    next_trial += count
                if not wave:
                    break
                for fut in wave:
                    b = fut.result()
                    if done:
                        continue
                    acc = _Batch(
                        acc.trials + b.trials,
                        acc.bit_errors + b.bit_errors,
                        acc.block_errors + b.block_errors,
                        acc.total_iters + b.total_iters,
                        acc.bit_errors_sq + b.bit_errors_sq,
                    )
                    if acc.block_errors >= config.min_block_errors or acc.trials >= config.max_trials:
                        done = True
            pr = PointResult(
                ebno, acc.trials, acc.bit_errors, acc.block_errors, acc.total_iters,
                time.perf_counter() - start, acc.bit_errors_sq,
            )
            log.info("Eb/N0 %.3f dB: %d trials, %d block errors", ebno, pr.trials, pr.block_errors)
            points.append(pr)
    return SimResult(config, lc.n, lc.k, tuple(points))

