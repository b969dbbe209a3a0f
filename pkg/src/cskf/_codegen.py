"""Generator for the unrolled per-cell kernels in ``_cmr_kernel.py``.

Run ``python -m cskf._codegen`` after changing the basis; a test checks that
the committed file matches the generator output.
"""
from __future__ import annotations

from pathlib import Path

from .lattice import C
from .moments import _combination_exact, _combination_inverse_exact

TARGET = Path(__file__).with_name("_cmr_kernel.py")

# equilibrium central moments as source expressions of rho, x2, y2, z2, ux, uy, uz
_MEQ = {
    0: "rho",
    9: "rho",
    10: "-rho * ux * (y2 + z2)",
    11: "-rho * uy * (x2 + z2)",
    12: "-rho * uz * (x2 + y2)",
    13: "-rho * ux * (y2 - z2)",
    14: "-rho * uy * (x2 - z2)",
    15: "-rho * uz * (x2 - y2)",
    16: "-rho * ux * uy * uz",
    17: "rho / 3.0 * (9.0 * x2 * y2 + 9.0 * x2 * z2 + 9.0 * y2 * z2 + 1.0)",
    18: "rho / 9.0 * (27.0 * x2 * y2 + 27.0 * x2 * z2 - 27.0 * y2 * z2 + 1.0)",
    19: "3.0 * rho * x2 * (y2 - z2)",
    20: "3.0 * rho * x2 * uy * uz",
    21: "3.0 * rho * ux * y2 * uz",
    22: "3.0 * rho * ux * uy * z2",
    23: "-rho / 3.0 * ux * (18.0 * y2 * z2 + y2 + z2)",
    24: "-rho / 3.0 * uy * (18.0 * x2 * z2 + x2 + z2)",
    25: "-rho / 3.0 * uz * (18.0 * x2 * y2 + x2 + y2)",
    26: "rho * (10.0 * x2 * y2 * z2 + x2 * y2 + x2 * z2 + y2 * z2 + 1.0 / 27.0)",
}

_STRIDES = ((9, 3, 1), (3, 9, 1), (1, 9, 3))  # (axis stride, other strides)


def _pop(k: int) -> int:
    a, b, c = k // 9 - 1, (k // 3) % 3 - 1, k % 3 - 1
    for i, v in enumerate(C):
        if tuple(v) == (a, b, c):
            return i
    raise KeyError(k)


def _linear(terms) -> str:
    out = ""
    for coef, name in terms:
        if coef == 0:
            continue
        mag = abs(coef)
        body = name if mag == 1 else f"{float(mag)!r} * {name}"
        if not out:
            out = ("-" if coef < 0 else "") + body
        else:
            out += (" - " if coef < 0 else " + ") + body
    return out or "0.0"


def _macros(src: str, ind: str) -> list[str]:
    # accumulate in grid order so every caller rounds identically
    rho, jx, jy, jz = [], [], [], []
    for k in range(27):
        a, b, c = k // 9 - 1, (k // 3) % 3 - 1, k % 3 - 1
        v = f"{src}{k}"
        rho.append(v)
        for lst, comp in ((jx, a), (jy, b), (jz, c)):
            if comp:
                lst.append(("-" if comp < 0 else "+", v))

    def chain(items):
        expr = ""
        for sign, v in items:
            expr = (f"-{v}" if sign == "-" else v) if not expr else f"{expr} {sign} {v}"
        return expr

    return [
        f"{ind}rho = {' + '.join(rho)}",
        f"{ind}inv = 1.0 / rho",
        f"{ind}ux = ({chain(jx)}) * inv",
        f"{ind}uy = ({chain(jy)}) * inv",
        f"{ind}uz = ({chain(jz)}) * inv",
    ]


def _axis_pass(src: str, dst: str, axis: int, u: str, ind: str, inverse: bool) -> list[str]:
    s, o1, o2 = _STRIDES[axis]
    lines = []
    for a in range(3):
        for b in range(3):
            base = a * o1 + b * o2
            i0, i1, i2 = base, base + s, base + 2 * s
            if not inverse:
                lines += [
                    f"{ind}r0 = {src}{i0} + {src}{i1} + {src}{i2}",
                    f"{ind}r1 = {src}{i2} - {src}{i0}",
                    f"{ind}r2 = {src}{i2} + {src}{i0}",
                    f"{ind}{dst}{i0} = r0",
                    f"{ind}{dst}{i1} = r1 - {u} * r0",
                    f"{ind}{dst}{i2} = r2 - 2.0 * {u} * r1 + {u} * {u} * r0",
                ]
            else:
                lines += [
                    f"{ind}r1 = {src}{i1} + {u} * {src}{i0}",
                    f"{ind}r2 = {src}{i2} + 2.0 * {u} * {src}{i1} + {u} * {u} * {src}{i0}",
                    f"{ind}{dst}{i0} = 0.5 * (r2 - r1)",
                    f"{ind}{dst}{i1} = {src}{i0} - r2",
                    f"{ind}{dst}{i2} = 0.5 * (r2 + r1)",
                ]
    return lines


def render() -> str:
    comb = _combination_exact()
    cinv = _combination_inverse_exact()
    pops = [_pop(k) for k in range(27)]
    ind = " " * 12
    load = [f"{ind}F{k} = f[{pops[k]}, cell]" for k in range(27)]
    body = list(load) + _macros("F", ind)
    body.append(f"{ind}if active[cell]:")
    ind2 = ind + "    "
    body += _axis_pass("F", "A", 0, "ux", ind2, False)
    body += _axis_pass("A", "B", 1, "uy", ind2, False)
    body += _axis_pass("B", "K", 2, "uz", ind2, False)
    body += [f"{ind2}x2 = ux * ux", f"{ind2}y2 = uy * uy", f"{ind2}z2 = uz * uz"]
    body += [f"{ind2}fac = factor[cell]"]
    # one division per distinct high-order rate group
    body.append(f"{ind2}s9 = 1.0 / (3.0 * fac * nu_prime[9] + 0.5)")
    rate = {j: "s_low" for j in range(4, 9)}
    rate[9] = "s9"
    for j in range(10, 27):
        body.append(f"{ind2}s{j} = s{j - 1} if nu_prime[{j}] == nu_prime[{j - 1}] "
                    f"else 1.0 / (3.0 * fac * nu_prime[{j}] + 0.5)")
        rate[j] = f"s{j}"
    for j in range(4, 27):
        m = _linear([(c, f"K{k}") for k, c in enumerate(comb[j]) if c])
        meq = _MEQ.get(j)
        diff = f"({m})" if meq is None else f"({m} - ({meq}))"
        body.append(f"{ind2}d{j} = -{rate[j]} * {diff}")
    for k in range(27):
        terms = [(cinv[k][j], f"d{j}") for j in range(4, 27) if cinv[k][j] != 0]
        expr = " + ".join(
            (f"{float(c)!r} * {name}" if c != 1 else name) for c, name in terms
        ).replace("+ -", "- ") if terms else "0.0"
        body.append(f"{ind2}G{k} = {expr}")
    body += _axis_pass("G", "H", 0, "ux", ind2, True)
    body += _axis_pass("H", "P", 1, "uy", ind2, True)
    body += _axis_pass("P", "Z", 2, "uz", ind2, True)
    for k in range(27):
        body.append(f"{ind2}F{k} = F{k} + Z{k}")
        body.append(f"{ind2}f[{pops[k]}, cell] = F{k}")
    body += _macros("F", ind2)
    body += [
        f"{ind}rho_out[cell] = rho",
        f"{ind}u_out[0, cell] = ux",
        f"{ind}u_out[1, cell] = uy",
        f"{ind}u_out[2, cell] = uz",
    ]
    macro_body = load + _macros("F", ind) + [
        f"{ind}rho_out[cell] = rho",
        f"{ind}u_out[0, cell] = ux",
        f"{ind}u_out[1, cell] = uy",
        f"{ind}u_out[2, cell] = uz",
    ]
    header = '''"""Unrolled per-cell collision and moment kernels. Generated by ``cskf._codegen``; do not edit."""
import numba

CHUNK = 256


@numba.njit(cache=True, parallel=True)
def collide_kernel(f, active, factor, s_low, nu_prime, rho_out, u_out):
    n = f.shape[1]
    nchunk = (n + CHUNK - 1) // CHUNK
    for c in numba.prange(nchunk):
        for cell in range(c * CHUNK, min(n, (c + 1) * CHUNK)):
'''
    macro_header = '''

@numba.njit(cache=True, parallel=True)
def macros_kernel(f, rho_out, u_out):
    n = f.shape[1]
    nchunk = (n + CHUNK - 1) // CHUNK
    for c in numba.prange(nchunk):
        for cell in range(c * CHUNK, min(n, (c + 1) * CHUNK)):
'''
    return header + "\n".join(body) + "\n" + macro_header + "\n".join(macro_body) + "\n"


def write() -> None:
    TARGET.write_text(render())


if __name__ == "__main__":
    write()
