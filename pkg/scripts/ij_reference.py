"""Reference values for the oscillatory constants I(H), J(H).

I(H) + iJ(H) = int_0^inf (e^{ir} - sum_{j<=floor(2H)} (ir)^j/j!) r^{-2H-1} dr.

Two independent evaluations:
  * analytic continuation of the Mellin transform,
        I(H) + iJ(H) = Gamma(-2H) * exp(-i*pi*H)      (2H not an integer),
    with the integer limits
        2H even:  J = (-1)^H * pi / (2*(2H)!)          (I-part -> log branch)
        2H odd:   I = (-1)^{H+1/2} * pi / (2*(2H)!)    (J-part -> log branch)
  * brute-force mpmath quadrature of the defining integral (slow; used here
    only to confirm the formula before freezing values).

Run:  python scripts/ij_reference.py [--check]
Prints a table suitable for freezing into tests.
"""

import argparse

import mpmath as mp

mp.mp.dps = 50


def ij_gamma(H):
    """I + iJ via Gamma(-2H) * exp(-i pi H); 2H must be non-integer."""
    H = mp.mpf(H)
    val = mp.gamma(-2 * H) * mp.expjpi(-H)
    return val.real, val.imag


def j_even_limit(p):
    """J at 2H = 2p (H = p integer)."""
    return (-1) ** p * mp.pi / (2 * mp.factorial(2 * p))


def i_odd_limit(p):
    """I at 2H = 2p+1 (H = p + 1/2)."""
    return (-1) ** (p + 1) * mp.pi / (2 * mp.factorial(2 * p + 1))


def _series_cos(r, m):
    return mp.fsum((-1) ** (j // 2) * r**j / mp.factorial(j)
                   for j in range(0, m + 1, 2))


def _series_sin(r, m):
    return mp.fsum((-1) ** ((j - 1) // 2) * r**j / mp.factorial(j)
                   for j in range(1, m + 1, 2))


def i_direct(H, m=None):
    """Defining integral for I(H), split at 1, oscillatory tail via quadosc."""
    H = mp.mpf(H)
    if m is None:
        m = int(mp.floor(2 * H))
    head = mp.quad(lambda r: (mp.cos(r) - _series_cos(r, m)) * r ** (-2 * H - 1),
                   [0, 1])
    tail_cos = mp.quadosc(lambda r: mp.cos(r) * r ** (-2 * H - 1),
                          [1, mp.inf], period=2 * mp.pi)
    tail_poly = mp.fsum((-1) ** (j // 2) / (mp.factorial(j) * (2 * H - j))
                        for j in range(0, m + 1, 2))
    return head + tail_cos - tail_poly


def j_direct(H, m=None):
    H = mp.mpf(H)
    if m is None:
        m = int(mp.floor(2 * H))
    head = mp.quad(lambda r: (mp.sin(r) - _series_sin(r, m)) * r ** (-2 * H - 1),
                   [0, 1])
    tail_sin = mp.quadosc(lambda r: mp.sin(r) * r ** (-2 * H - 1),
                          [1, mp.inf], period=2 * mp.pi)
    tail_poly = mp.fsum((-1) ** ((j - 1) // 2) / (mp.factorial(j) * (2 * H - j))
                        for j in range(1, m + 1, 2))
    return head + tail_sin - tail_poly


H_TABLE = ["0.05", "0.15", "0.25", "0.3", "0.35", "0.4", "0.45",
           "0.4995", "0.5005", "0.65", "0.7", "0.9", "0.95",
           "1.3", "1.35", "1.7", "1.9"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true",
                    help="cross-check the Gamma formula against direct quadrature")
    args = ap.parse_args()

    if args.check:
        for H in ["0.25", "0.7", "1.3", "1.9"]:
            ig, jg = ij_gamma(H)
            idq = i_direct(H)
            jdq = j_direct(H)
            print(f"H={H}:  gamma I={mp.nstr(ig, 20)}  direct I={mp.nstr(idq, 20)}"
                  f"  |diff|={mp.nstr(abs(ig - idq), 3)}")
            print(f"H={H}:  gamma J={mp.nstr(jg, 20)}  direct J={mp.nstr(jdq, 20)}"
                  f"  |diff|={mp.nstr(abs(jg - jdq), 3)}")
        # integer limits: direct integral of the surviving part
        # 2H = 1 (odd): I with even series terms j <= 0
        i1 = i_direct("0.5", m=0)
        print(f"2H=1: direct I={mp.nstr(i1, 20)}  limit={mp.nstr(i_odd_limit(0), 20)}")
        # 2H = 2 (even): J with odd series terms j <= 1
        j2 = j_direct("1.0", m=1)
        print(f"2H=2: direct J={mp.nstr(j2, 20)}  limit={mp.nstr(j_even_limit(1), 20)}")
        # 2H = 3 (odd): I with even series terms j <= 2
        i3 = i_direct("1.5", m=2)
        print(f"2H=3: direct I={mp.nstr(i3, 20)}  limit={mp.nstr(i_odd_limit(1), 20)}")
        return

    print("# (H, I(H), J(H)) frozen from Gamma(-2H)*exp(-i*pi*H), mpmath dps=50")
    print("IJ_REFERENCE = {")
    for H in H_TABLE:
        ig, jg = ij_gamma(H)
        print(f'    "{H}": ({mp.nstr(ig, 25)}, {mp.nstr(jg, 25)}),')
    print("}")
    print()
    print("# integer-branch surviving constants")
    print("# 2H even: J(H); 2H odd: I(H)")
    print("IJ_INTEGER_REFERENCE = {")
    for two_h in [1, 2, 3]:
        if two_h % 2 == 0:
            p = two_h // 2
            print(f'    {two_h}: ("J", {mp.nstr(j_even_limit(p), 25)}),')
        else:
            p = (two_h - 1) // 2
            print(f'    {two_h}: ("I", {mp.nstr(i_odd_limit(p), 25)}),')
    print("}")


if __name__ == "__main__":
    main()
