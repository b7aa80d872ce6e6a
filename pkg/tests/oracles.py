"""Slow scalar reference implementations used as independent test oracles.

Nothing here imports the kernels under test; boundary reflection is
re-derived by walking the index back into range.
"""

import math

import numpy as np


def mirror(k, n):
    if n == 1:
        return 0
    while k < 0 or k >= n:
        if k < 0:
            k = -k
        if k >= n:
            k = 2 * (n - 1) - k
    return k


def pix(img, y, x):
    h, w = len(img), len(img[0])
    return float(img[mirror(y, h)][mirror(x, w)])


def road(img, radius, m):
    h, w = len(img), len(img[0])
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            diffs = []
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    if dy or dx:
                        diffs.append(abs(pix(img, y, x) - pix(img, y + dy, x + dx)))
            out[y, x] = sum(sorted(diffs)[:m])
    return out


def nlm(img, d, D, sigma_r, a, self_max, threshold=None):
    """Direct double loop; ``a`` is the effective d x d offset weight grid."""
    h, w = len(img), len(img[0])
    rp, rs = d // 2, D // 2
    asum = sum(a[ky][kx] for ky in range(d) for kx in range(d))
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            cands = []
            for sy in range(-rs, rs + 1):
                for sx in range(-rs, rs + 1):
                    dist = 0.0
                    plain = 0.0
                    for ky in range(-rp, rp + 1):
                        for kx in range(-rp, rp + 1):
                            diff = pix(img, y + ky, x + kx) - pix(img, y + sy + ky, x + sx + kx)
                            dist += a[ky + rp][kx + rp] * diff * diff
                            plain += diff * diff
                    wt = math.exp(-(dist / asum) / (2 * sigma_r**2))
                    passed = threshold is None or plain <= threshold**2
                    cands.append((sy == 0 and sx == 0, passed, wt, pix(img, y + sy, x + sx)))
            if threshold is not None and not any(p for s, p, _, _ in cands if not s):
                cands = [(s, True, wt, v) for s, _, wt, v in cands]
            others = [wt for s, p, wt, _ in cands if p and not s]
            num = den = 0.0
            for s, p, wt, v in cands:
                if s:
                    if self_max:
                        wt = max(others) if others else 1.0
                elif not p:
                    continue
                num += wt * v
                den += wt
            out[y, x] = num / den
    return out


def _wmedian(vals, wts):
    total = sum(wts)
    if total <= 0:
        return float(np.median(vals))
    acc = 0.0
    for v, wt in sorted(zip(vals, wts), key=lambda t: t[0]):
        acc += wt
        if acc >= total / 2:
            return v
    return max(vals)


def trif(img, D, s_i, s_j, s_s, s_r, radius=1, m=4):
    h, w = len(img), len(img[0])
    rd = road(img, radius, m)
    rs = D // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            num = den = 0.0
            vals, wis = [], []
            for sy in range(-rs, rs + 1):
                for sx in range(-rs, rs + 1):
                    jy, jx = mirror(y + sy, h), mirror(x + sx, w)
                    vj = float(img[jy][jx])
                    ws = math.exp(-max(abs(sy), abs(sx)) ** 2 / (2 * s_s**2))
                    wr = math.exp(-(float(img[y][x]) - vj) ** 2 / (2 * s_r**2))
                    wi = math.exp(-rd[jy, jx] ** 2 / (2 * s_i**2))
                    J = math.exp(-((rd[y, x] + rd[jy, jx]) / 2) ** 2 / (2 * s_j**2))
                    wt = ws * wr**J * wi ** (1 - J)
                    num += wt * vj
                    den += wt
                    vals.append(vj)
                    wis.append(wi)
            out[y, x] = num / den if den >= 1e-12 else _wmedian(vals, wis)
    return out


def _g(dist, sigma):
    return 1.0 if math.isinf(sigma) else math.exp(-dist * dist / (2 * sigma * sigma))


def pwmf_norm(img, wi, y, x, jy, jx, d, s_sm):
    rp = d // 2
    num = den = 0.0
    for ky in range(-rp, rp + 1):
        for kx in range(-rp, rp + 1):
            if ky == 0 and kx == 0:
                continue
            f = _g(max(abs(ky), abs(kx)), s_sm) * pix(wi, y + ky, x + kx) * pix(wi, jy + ky, jx + kx)
            diff = pix(img, y + ky, x + kx) - pix(img, jy + ky, jx + kx)
            num += f * diff * diff
            den += f
    return math.inf if den < 1e-12 else num / den


def pwmf(img, d, D, s_i, s_m, s_s, s_sm, radius=1, m=4):
    h, w = len(img), len(img[0])
    rd = road(img, radius, m)
    wi = [[math.exp(-rd[y, x] ** 2 / (2 * s_i**2)) for x in range(w)] for y in range(h)]
    rs = D // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            num = den = 0.0
            vals, wis = [], []
            for sy in range(-rs, rs + 1):
                for sx in range(-rs, rs + 1):
                    jy, jx = y + sy, x + sx
                    vj = pix(img, jy, jx)
                    wij = pix(wi, jy, jx)
                    if sy == 0 and sx == 0:
                        wm = 1.0
                    else:
                        n2 = pwmf_norm(img, wi, y, x, jy, jx, d, s_sm)
                        wm = 0.0 if math.isinf(n2) else math.exp(-n2 / (2 * s_m**2))
                    wt = _g(max(abs(sy), abs(sx)), s_s) * wij * wm
                    num += wt * vj
                    den += wt
                    vals.append(vj)
                    wis.append(wij)
            out[y, x] = num / den if den >= 1e-12 else _wmedian(vals, wis)
    return out


def ds(img, t, d, D):
    h, w = len(img), len(img[0])
    rp, rs = d // 2, D // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            count = 0
            for sy in range(-rs, rs + 1):
                for sx in range(-rs, rs + 1):
                    s = 0.0
                    for ky in range(-rp, rp + 1):
                        for kx in range(-rp, rp + 1):
                            diff = pix(img, y + ky, x + kx) - pix(img, y + sy + ky, x + sx + kx)
                            s += diff * diff
                    count += math.sqrt(s) <= t
            out[y, x] = count / D**2
    return out
