"""Adaptive byte compressor: context mixing by escape (PPM) over an
arithmetic coder.

The model keeps frequency tables for contexts of length 0..max_order plus a
uniform fallback level. Escapes use method C: the escape weight of a context
equals its count of distinct (non-excluded) symbols. Symbols rejected at a
higher order are excluded from the shorter contexts tried after it. The
alphabet is the 256 byte values plus one end-of-stream symbol, so decoding
never needs an out-of-band length.

Encoder and decoder drive the identical model, so the format is defined by
this file alone: any change to update order, rescale, or interval layout is
a format change.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PpmTruncatedError

ALPHABET = 257
EOS = 256

# Context totals are halved once they reach this bound; keeps coder
# intervals wide and adapts the model to drifting statistics.
MAX_TOTAL = 1 << 14

_STATE_BITS = 32
_MASK = (1 << _STATE_BITS) - 1
_HALF = 1 << (_STATE_BITS - 1)
_QUARTER = 1 << (_STATE_BITS - 2)

# Bits the decoder may read past the physical end of a stream before the
# stream is declared truncated: the initial register fill plus the final
# flush padding.
_PAD_SLACK = _STATE_BITS


@dataclass
class PpmConfig:
    max_order: int = 3

    def __post_init__(self):
        if not 0 <= self.max_order <= 8:
            raise ValueError(f"max_order must be in 0..8, got {self.max_order}")


class _BitWriter:
    def __init__(self):
        self.buf = bytearray()
        self.acc = 0
        self.nbits = 0

    def write(self, bit: int):
        self.acc = (self.acc << 1) | bit
        self.nbits += 1
        if self.nbits == 8:
            self.buf.append(self.acc)
            self.acc = 0
            self.nbits = 0

    def getvalue(self) -> bytes:
        if self.nbits:
            self.buf.append(self.acc << (8 - self.nbits))
            self.acc = 0
            self.nbits = 0
        return bytes(self.buf)


class _BitReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.acc = 0
        self.nbits = 0
        self.past_end = 0

    def read(self) -> int:
        if self.nbits == 0:
            if self.pos < len(self.data):
                self.acc = self.data[self.pos]
                self.pos += 1
                self.nbits = 8
            else:
                self.past_end += 1
                if self.past_end > _PAD_SLACK:
                    raise PpmTruncatedError("compressed stream exhausted mid-symbol")
                return 0
        self.nbits -= 1
        return (self.acc >> self.nbits) & 1


class ArithmeticEncoder:
    """Binary-renormalized range coder over 32-bit state."""

    def __init__(self):
        self.low = 0
        self.high = _MASK
        self.pending = 0
        self.out = _BitWriter()

    def encode(self, cum_low: int, cum_high: int, total: int):
        span = self.high - self.low + 1
        self.high = self.low + cum_high * span // total - 1
        self.low = self.low + cum_low * span // total
        while True:
            if self.high < _HALF:
                self._emit(0)
            elif self.low >= _HALF:
                self._emit(1)
                self.low -= _HALF
                self.high -= _HALF
            elif self.low >= _QUARTER and self.high < 3 * _QUARTER:
                self.pending += 1
                self.low -= _QUARTER
                self.high -= _QUARTER
            else:
                break
            self.low = (self.low << 1) & _MASK
            self.high = ((self.high << 1) | 1) & _MASK

    def _emit(self, bit: int):
        self.out.write(bit)
        inv = 1 - bit
        while self.pending:
            self.out.write(inv)
            self.pending -= 1

    def finish(self) -> bytes:
        self.pending += 1
        if self.low < _QUARTER:
            self._emit(0)
        else:
            self._emit(1)
        return self.out.getvalue()


class ArithmeticDecoder:
    def __init__(self, data: bytes):
        self.inp = _BitReader(data)
        self.low = 0
        self.high = _MASK
        self.code = 0
        for _ in range(_STATE_BITS):
            self.code = (self.code << 1) | self.inp.read()

    def target(self, total: int) -> int:
        span = self.high - self.low + 1
        return ((self.code - self.low + 1) * total - 1) // span

    def consume(self, cum_low: int, cum_high: int, total: int):
        span = self.high - self.low + 1
        self.high = self.low + cum_high * span // total - 1
        self.low = self.low + cum_low * span // total
        while True:
            if self.high < _HALF:
                pass
            elif self.low >= _HALF:
                self.low -= _HALF
                self.high -= _HALF
                self.code -= _HALF
            elif self.low >= _QUARTER and self.high < 3 * _QUARTER:
                self.low -= _QUARTER
                self.high -= _QUARTER
                self.code -= _QUARTER
            else:
                break
            self.low = (self.low << 1) & _MASK
            self.high = ((self.high << 1) | 1) & _MASK
            self.code = ((self.code << 1) | self.inp.read()) & _MASK


class _Table:
    """Frequency table of one context: counts, order, running totals."""

    __slots__ = ("counts", "order_syms", "total")

    def __init__(self):
        self.counts: dict[int, int] = {}
        self.order_syms: list[int] = []
        self.total = 0

    def add(self, sym: int):
        c = self.counts.get(sym)
        if c is None:
            self.counts[sym] = 1
            # insertion keeps interval layout sorted by symbol value
            lo, hi = 0, len(self.order_syms)
            while lo < hi:
                mid = (lo + hi) // 2
                if self.order_syms[mid] < sym:
                    lo = mid + 1
                else:
                    hi = mid
            self.order_syms.insert(lo, sym)
        else:
            self.counts[sym] = c + 1
        self.total += 1
        if self.total + len(self.order_syms) > MAX_TOTAL:
            total = 0
            for s, c in self.counts.items():
                c = (c + 1) // 2
                self.counts[s] = c
                total += c
            self.total = total


class _Model:
    """Shared encoder/decoder model state."""

    def __init__(self, cfg: PpmConfig):
        self.max_order = cfg.max_order
        self.tables: dict[bytes, _Table] = {}
        # Dense order-0 table; the hot path for long streams.
        self.counts0 = np.zeros(ALPHABET, dtype=np.int64)
        self.total0 = 0
        self.distinct0 = 0
        self.history = bytearray()

    def update(self, sym: int):
        if self.counts0[sym] == 0:
            self.distinct0 += 1
        self.counts0[sym] += 1
        self.total0 += 1
        if self.total0 + self.distinct0 > MAX_TOTAL:
            nz = self.counts0 > 0
            self.counts0[nz] = (self.counts0[nz] + 1) // 2
            self.total0 = int(self.counts0.sum())
        h = self.history
        for k in range(1, self.max_order + 1):
            if len(h) < k:
                break
            key = bytes(h[-k:])
            tab = self.tables.get(key)
            if tab is None:
                tab = _Table()
                self.tables[key] = tab
            tab.add(sym)
        h.append(sym)
        if len(h) > self.max_order:
            del h[: len(h) - self.max_order]

    def fingerprint(self) -> int:
        acc = hash((self.total0, self.distinct0, self.counts0.tobytes(), bytes(self.history)))
        for key in sorted(self.tables):
            tab = self.tables[key]
            acc = hash((acc, key, tuple(sorted(tab.counts.items())), tab.total))
        return acc


def _encode_symbol(model: _Model, enc: ArithmeticEncoder, sym: int, probe=None):
    excluded: set[int] = set()
    h = model.history
    for k in range(min(model.max_order, len(h)), 0, -1):
        tab = model.tables.get(bytes(h[-k:]))
        if tab is None:
            continue
        cum = 0
        sym_low = None
        avail = 0
        for s in tab.order_syms:
            if s in excluded:
                continue
            c = tab.counts[s]
            if s == sym:
                sym_low = cum
                sym_high = cum + c
            cum += c
            avail += 1
        if avail == 0:
            continue
        total = cum + avail  # escape weight = distinct non-excluded symbols
        if sym_low is not None:
            enc.encode(sym_low, sym_high, total)
            if probe is not None:
                probe(sym_high - sym_low, total)
            return
        enc.encode(cum, total, total)
        if probe is not None:
            probe(avail, total)
        for s in tab.order_syms:
            excluded.add(s)
    # order 0
    counts0 = model.counts0
    if model.distinct0 > 0:
        if excluded:
            excl = [s for s in excluded if counts0[s] > 0]
        else:
            excl = []
        avail = model.distinct0 - len(excl)
        if avail > 0:
            drop_before = 0
            drop_total = 0
            for s in excl:
                drop_total += int(counts0[s])
                if s < sym:
                    drop_before += int(counts0[s])
            cums = np.cumsum(counts0)
            c = int(counts0[sym])
            total = model.total0 - drop_total + avail
            if c > 0 and sym not in excluded:
                sym_low = int(cums[sym]) - c - drop_before
                enc.encode(sym_low, sym_low + c, total)
                if probe is not None:
                    probe(c, total)
                return
            esc_low = model.total0 - drop_total
            enc.encode(esc_low, total, total)
            if probe is not None:
                probe(avail, total)
            for s in range(ALPHABET):
                if counts0[s] > 0:
                    excluded.add(s)
    # uniform fallback
    avail = [s for s in range(ALPHABET) if s not in excluded]
    idx = avail.index(sym)
    enc.encode(idx, idx + 1, len(avail))
    if probe is not None:
        probe(1, len(avail))


def _decode_symbol(model: _Model, dec: ArithmeticDecoder) -> int:
    excluded: set[int] = set()
    h = model.history
    for k in range(min(model.max_order, len(h)), 0, -1):
        tab = model.tables.get(bytes(h[-k:]))
        if tab is None:
            continue
        if excluded:
            active = [(s, tab.counts[s]) for s in tab.order_syms if s not in excluded]
        else:
            active = [(s, tab.counts[s]) for s in tab.order_syms]
        if not active:
            continue
        cum_counts = sum(c for _, c in active)
        total = cum_counts + len(active)
        target = dec.target(total)
        if target >= cum_counts:
            dec.consume(cum_counts, total, total)
            for s in tab.order_syms:
                excluded.add(s)
            continue
        cum = 0
        for s, c in active:
            if target < cum + c:
                dec.consume(cum, cum + c, total)
                return s
            cum += c
    counts0 = model.counts0
    if model.distinct0 > 0:
        excl = [s for s in excluded if counts0[s] > 0] if excluded else []
        avail = model.distinct0 - len(excl)
        if avail > 0:
            drop_total = sum(int(counts0[s]) for s in excl)
            sym_total = model.total0 - drop_total
            total = sym_total + avail
            target = dec.target(total)
            if target >= sym_total:
                dec.consume(sym_total, total, total)
                for s in range(ALPHABET):
                    if counts0[s] > 0:
                        excluded.add(s)
            else:
                if excl:
                    adj = counts0.copy()
                    for s in excl:
                        adj[s] = 0
                    cums = np.cumsum(adj)
                else:
                    cums = np.cumsum(counts0)
                sym = int(np.searchsorted(cums, target, side="right"))
                c = int(counts0[sym])
                sym_low = int(cums[sym]) - c
                dec.consume(sym_low, sym_low + c, total)
                return sym
    avail_list = [s for s in range(ALPHABET) if s not in excluded]
    total = len(avail_list)
    target = dec.target(total)
    dec.consume(target, target + 1, total)
    return avail_list[target]


def ppm_compress(data: bytes, cfg: PpmConfig | None = None, model_hook=None, probe=None) -> bytes:
    """Compress data; an explicit end-of-stream symbol terminates the code.

    model_hook(index, model) fires after each model update; probe(freq,
    total) fires per coded interval. Both exist for tests.
    """
    if cfg is None:
        cfg = PpmConfig()
    model = _Model(cfg)
    enc = ArithmeticEncoder()
    for i, byte in enumerate(data):
        _encode_symbol(model, enc, byte, probe)
        model.update(byte)
        if model_hook is not None:
            model_hook(i, model)
    _encode_symbol(model, enc, EOS, probe)
    return enc.finish()


def ppm_decompress(data: bytes, cfg: PpmConfig | None = None, model_hook=None) -> bytes:
    """Inverse of ppm_compress for a matching config.

    A stream cut short raises PpmTruncatedError. Decoding with a different
    max_order than the encoder used is not detected: it returns garbage or
    raises, but terminates either way.
    """
    if cfg is None:
        cfg = PpmConfig()
    model = _Model(cfg)
    dec = ArithmeticDecoder(data)
    out = bytearray()
    while True:
        sym = _decode_symbol(model, dec)
        if sym == EOS:
            return bytes(out)
        out.append(sym)
        model.update(sym)
        if model_hook is not None:
            model_hook(len(out) - 1, model)
