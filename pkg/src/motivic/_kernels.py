"""Dense univariate polynomial kernels over a finite field F_q.

Field elements are integer codes 0..q-1.  Two native representations:

* ``Gf2Kernel``: the polynomial is a Python int whose bit k is the
  coefficient of x^k (q = 2 only).  Carry-less arithmetic is fast.
* ``TupleKernel``: a tuple of codes in ascending degree without trailing
  zeros.  Prime fields get numpy fast paths; extension fields use the
  context's lookup tables.

Kernels know nothing about θ, u or t; the same kernel serves ThetaPoly
(variable θ) and LaurentSeries (variable u = 1/θ).
"""

from __future__ import annotations

import numpy as np

_NUMPY_MIN = 48  # below this many coefficients the pure-Python path wins


class Gf2Kernel:
    zero = 0
    one = 1

    def from_list(self, codes):
        x = 0
        for k, c in enumerate(codes):
            if c & 1:
                x |= 1 << k
        return x

    def to_list(self, a):
        return [int(ch) for ch in reversed(bin(a)[2:])] if a else []

    def monomial(self, c, k):
        return (c & 1) << k

    def degree(self, a):
        return a.bit_length() - 1

    def low(self, a):
        return (a & -a).bit_length() - 1

    def coeff(self, a, k):
        return (a >> k) & 1 if k >= 0 else 0

    def lead(self, a):
        return 1

    def is_zero(self, a):
        return a == 0

    def add(self, a, b):
        return a ^ b

    sub = add

    def neg(self, a):
        return a

    def scale(self, c, a):
        return a if c else 0

    def mul(self, a, b):
        if not a or not b:
            return 0
        if a.bit_length() > b.bit_length():
            a, b = b, a
        if a.bit_length() <= 64 or a.bit_count() * 4 < a.bit_length():
            r = 0
            while a:
                lowbit = a & -a
                r ^= b << (lowbit.bit_length() - 1)
                a ^= lowbit
            return r
        # 4-bit windows over the shorter factor
        table = [0] * 16
        for w in range(1, 16):
            v = 0
            for k in range(4):
                if (w >> k) & 1:
                    v ^= b << k
            table[w] = v
        r = 0
        shift = 0
        while a:
            nib = a & 15
            if nib:
                r ^= table[nib] << shift
            a >>= 4
            shift += 4
        return r

    def mul_trunc(self, a, b, n):
        if n <= 0:
            return 0
        mask = (1 << n) - 1
        return self.mul(a & mask, b & mask) & mask

    def trunc(self, a, n):
        return a & ((1 << n) - 1) if n > 0 else 0

    def shift(self, a, k):
        return a << k if k >= 0 else a >> (-k)

    def divmod(self, a, b):
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        db = b.bit_length() - 1
        quo = 0
        while a and a.bit_length() - 1 >= db:
            s = a.bit_length() - 1 - db
            a ^= b << s
            quo |= 1 << s
        return quo, a

    def spread(self, a, factor):
        if factor == 1:
            return a
        r = 0
        k = 0
        while a:
            if a & 1:
                r |= 1 << (k * factor)
            a >>= 1
            k += 1
        return r

    def eval_code(self, a, c):
        if c:
            return a.bit_count() & 1
        return a & 1


class TupleKernel:
    zero = ()

    def __init__(self, ctx):
        self.ctx = ctx
        self.p = ctx.p
        self.prime = ctx.r == 1
        self.one = (1,)

    # -- helpers -----------------------------------------------------
    @staticmethod
    def _strip(lst):
        n = len(lst)
        while n and not lst[n - 1]:
            n -= 1
        return tuple(lst[:n])

    def from_list(self, codes):
        return self._strip([int(c) for c in codes])

    def to_list(self, a):
        return list(a)

    def monomial(self, c, k):
        return (0,) * k + (c,) if c else ()

    def degree(self, a):
        return len(a) - 1

    def low(self, a):
        for k, c in enumerate(a):
            if c:
                return k
        return -1

    def coeff(self, a, k):
        return a[k] if 0 <= k < len(a) else 0

    def lead(self, a):
        return a[-1]

    def is_zero(self, a):
        return not a

    def add(self, a, b):
        if len(a) < len(b):
            a, b = b, a
        if not b:
            return a
        if self.prime:
            p = self.p
            out = [(x + y) % p for x, y in zip(a, b)]
        else:
            tab = self.ctx._add
            out = [tab[x][y] for x, y in zip(a, b)]
        out.extend(a[len(b):])
        return self._strip(out)

    def neg(self, a):
        if self.prime:
            p = self.p
            return tuple((p - x) % p for x in a)
        neg = self.ctx._neg
        return tuple(neg[x] for x in a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def scale(self, c, a):
        if not c:
            return ()
        if self.prime:
            p = self.p
            return tuple((c * x) % p for x in a)
        row = self.ctx._mul[c]
        return tuple(row[x] for x in a)

    def _single(self, a):
        k = len(a) - 1
        return k if not any(a[:k]) else -1

    def mul(self, a, b):
        if not a or not b:
            return ()
        if len(a) > len(b):
            a, b = b, a
        k = self._single(a)
        if k >= 0:
            return (0,) * k + self.scale(a[-1], b)
        if self.prime:
            p = self.p
            if min(len(a), len(b)) >= _NUMPY_MIN:
                r = np.convolve(np.asarray(a, dtype=np.int64),
                                np.asarray(b, dtype=np.int64)) % p
                return self._strip(r.tolist())
            out = [0] * (len(a) + len(b) - 1)
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        out[i + j] += x * y
            return self._strip([v % p for v in out])
        add, mul = self.ctx._add, self.ctx._mul
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                row = mul[x]
                for j, y in enumerate(b):
                    if y:
                        out[i + j] = add[out[i + j]][row[y]]
        return self._strip(out)

    def mul_trunc(self, a, b, n):
        if n <= 0:
            return ()
        return self.trunc(self.mul(a[:n], b[:n]), n)

    def trunc(self, a, n):
        if n <= 0:
            return ()
        return self._strip(list(a[:n])) if len(a) > n else a

    def shift(self, a, k):
        if not a:
            return a
        if k >= 0:
            return (0,) * k + a
        return self._strip(list(a[-k:]))

    def divmod(self, a, b):
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        db = len(b) - 1
        if len(a) <= db:
            return (), a
        inv_lead = self.ctx._inv[b[-1]]
        if self.prime:
            p = self.p
            if len(b) >= _NUMPY_MIN:
                rem = np.asarray(a, dtype=np.int64).copy()
                bv = np.asarray(b, dtype=np.int64)
                quo = np.zeros(len(a) - db, dtype=np.int64)
                for i in range(len(a) - 1, db - 1, -1):
                    c = int(rem[i]) % p * inv_lead % p
                    if c:
                        quo[i - db] = c
                        rem[i - db:i + 1] -= c * bv
                return self._strip(quo.tolist()), self._strip((rem[:db] % p).tolist())
            rem = list(a)
            quo = [0] * (len(a) - db)
            for i in range(len(a) - 1, db - 1, -1):
                c = rem[i] * inv_lead % p
                if c:
                    quo[i - db] = c
                    for j in range(db + 1):
                        rem[i - db + j] = (rem[i - db + j] - c * b[j]) % p
            return self._strip(quo), self._strip(rem[:db])
        add, mul, neg = self.ctx._add, self.ctx._mul, self.ctx._neg
        rem = list(a)
        quo = [0] * (len(a) - db)
        for i in range(len(a) - 1, db - 1, -1):
            c = mul[rem[i]][inv_lead]
            if c:
                quo[i - db] = c
                nc = neg[c]
                for j in range(db + 1):
                    rem[i - db + j] = add[rem[i - db + j]][mul[nc][b[j]]]
        return self._strip(quo), self._strip(rem[:db])

    def spread(self, a, factor):
        if factor == 1 or len(a) <= 1:
            return a
        out = [0] * ((len(a) - 1) * factor + 1)
        out[::factor] = a
        return tuple(out)

    def eval_code(self, a, c):
        acc = 0
        if self.prime:
            for x in reversed(a):
                acc = (acc * c + x) % self.p
            return acc
        add, mul = self.ctx._add, self.ctx._mul
        for x in reversed(a):
            acc = add[mul[acc][c]][x]
        return acc


def poly_gcd(kernel, a, b):
    """Monic gcd of two kernel polynomials."""
    if (isinstance(kernel, TupleKernel) and kernel.prime
            and min(len(a), len(b)) >= _NUMPY_MIN):
        return _np_gcd(kernel, a, b)
    while not kernel.is_zero(b):
        a, b = b, kernel.divmod(a, b)[1]
    return a


def _np_trim(v):
    nz = np.flatnonzero(v)
    return v[:nz[-1] + 1] if nz.size else v[:0]


def _np_gcd(kernel, a, b):
    """Euclid over F_p on int64 arrays, converting only at the ends."""
    p = kernel.p
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    while b.size:
        db = b.size - 1
        inv = pow(int(b[-1]), p - 2, p)
        r = a.copy()
        # reduce once per division; entries stay below len(a) * p^2
        for i in range(r.size - 1, db - 1, -1):
            c = int(r[i]) % p * inv % p
            if c:
                r[i - db:i + 1] -= c * b
        a, b = b, _np_trim(r[:db] % p)
    return kernel._strip(a.tolist())


def series_inverse(kernel, inv_code, a, n):
    """Inverse of a power series ``a`` (nonzero constant term) modulo x^n.

    Newton iteration b <- b(2 - ab); ``inv_code`` inverts a field code.
    """
    if n <= 0:
        return kernel.zero
    c0 = kernel.coeff(a, 0)
    b = kernel.monomial(inv_code(c0), 0)
    prec = 1
    two = kernel.monomial(2 % kernel_char(kernel), 0) if kernel_char(kernel) != 2 else None
    while prec < n:
        prec = min(2 * prec, n)
        ab = kernel.mul_trunc(a, b, prec)
        if two is None:
            # char 2: b(2 - ab) = b*ab  (since 2 = 0 and -1 = 1)
            b = kernel.mul_trunc(b, ab, prec)
        else:
            b = kernel.mul_trunc(b, kernel.sub(two, ab), prec)
    return kernel.trunc(b, n)


def kernel_char(kernel):
    return 2 if isinstance(kernel, Gf2Kernel) else kernel.p
