"""
疎な多項式ベクトル場の演算

多項式は {指数: 係数} の辞書、ベクトル場 (写像) は成分ごとの多項式のリストで表す。
係数体は厳密 (sympy の QQ_I) と数値 (complex) の 2 種類を ExactField / NumericField で切り替える。
"""
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import QQ_I

from .germ import ComplexScalar, Exponents, GermPoly, MonomialTerm, gaussian, qq_to_fraction

Poly = Dict[Exponents, object]
VectorField = List[Poly]


class ExactField:
    """
    Gaussian 有理数 (sympy の QQ_I) の係数体
    """
    name = 'exact'

    def __init__(self):
        self.zero = QQ_I.zero
        self.one = QQ_I.one

    def is_zero(self, a) -> bool:
        # QQ_I の元は int との == が定義されないため真偽値で判定する
        return not a

    def from_int(self, k: int):
        return gaussian(k)

    def convert(self, value):
        """
        係数を QQ_I の元に変換する

        Args:
            value: ComplexScalar (厳密値付き)、QQ_I の元、整数または Fraction

        Returns:
            QQ_I の元
        """
        if isinstance(value, ComplexScalar):
            return value.to_gaussian()
        if QQ_I.of_type(value):
            return value
        return gaussian(value)

    def to_scalar(self, a) -> ComplexScalar:
        return ComplexScalar.from_fractions(qq_to_fraction(a.x), qq_to_fraction(a.y))

    def to_complex(self, a) -> complex:
        return complex(float(qq_to_fraction(a.x)), float(qq_to_fraction(a.y)))


class NumericField:
    """
    complex の係数体。絶対値が prune 以下の係数は 0 とみなす
    """
    name = 'numeric'

    def __init__(self, prune: float = 1e-14):
        self.zero = 0j
        self.one = 1 + 0j
        self.prune = prune

    def is_zero(self, a) -> bool:
        return abs(a) <= self.prune

    def from_int(self, k: int) -> complex:
        return complex(k)

    def convert(self, value) -> complex:
        if isinstance(value, ComplexScalar):
            return value.value
        if QQ_I.of_type(value):
            return ExactField().to_complex(value)
        return complex(value)

    def to_scalar(self, a) -> ComplexScalar:
        return ComplexScalar.from_complex(a)

    def to_complex(self, a) -> complex:
        return complex(a)


EXACT = ExactField()
NUMERIC = NumericField()


def degree(exponents: Exponents) -> int:
    return sum(exponents)


def unit(n: int, j: int) -> Exponents:
    """j 番目 (0 始まり) の単位指数 e_j"""
    return tuple(1 if k == j else 0 for k in range(n))


def germ_to_field(germ: GermPoly, field) -> VectorField:
    """
    germ を係数体 field 上のベクトル場に変換する (成分は 0 始まり)
    """
    polys: VectorField = [{} for _ in range(germ.dimension)]
    for term in germ.terms:
        polys[term.component - 1][term.exponents] = field.convert(term.coeff)
    return polys


def field_to_germ(polys: VectorField, field) -> GermPoly:
    """
    係数体 field 上のベクトル場を germ に変換する (0 の係数は除く)
    """
    n = len(polys)
    terms = [
        MonomialTerm(i + 1, exps, field.to_scalar(coeff))
        for i, poly in enumerate(polys)
        for exps, coeff in poly.items()
        if not field.is_zero(coeff)
    ]
    return GermPoly(n, tuple(terms))


def poly_add_into(acc: Poly, other: Poly, field, factor=None) -> Poly:
    """
    acc に factor · other を加える (acc を直接更新する)
    """
    for exps, coeff in other.items():
        value = coeff if factor is None else factor * coeff
        if exps in acc:
            total = acc[exps] + value
            if field.is_zero(total):
                del acc[exps]
            else:
                acc[exps] = total
        elif not field.is_zero(value):
            acc[exps] = value
    return acc


def poly_mul(p: Poly, q: Poly, field, max_degree: Optional[int] = None) -> Poly:
    """
    多項式の積。max_degree を超える次数の項は捨てる
    """
    result: Poly = {}
    for e1, c1 in p.items():
        d1 = degree(e1)
        for e2, c2 in q.items():
            if max_degree is not None and d1 + degree(e2) > max_degree:
                continue
            exps = tuple(a + b for a, b in zip(e1, e2))
            value = c1 * c2
            if exps in result:
                result[exps] = result[exps] + value
            else:
                result[exps] = value
    return {exps: coeff for exps, coeff in result.items() if not field.is_zero(coeff)}


def truncate(p: Poly, max_degree: int) -> Poly:
    return {exps: coeff for exps, coeff in p.items() if degree(exps) <= max_degree}


def homogeneous_part(p: Poly, k: int) -> Poly:
    return {exps: coeff for exps, coeff in p.items() if degree(exps) == k}


def derivative(p: Poly, j: int, field) -> Poly:
    """∂p/∂w_j"""
    result = {}
    for exps, coeff in p.items():
        if exps[j] == 0:
            continue
        lowered = exps[:j] + (exps[j] - 1,) + exps[j + 1:]
        result[lowered] = field.from_int(exps[j]) * coeff
    return result


def jacobian_apply(h: VectorField, v: VectorField, field, max_degree: Optional[int] = None) -> VectorField:
    """
    Dh · v を計算する ((Dh·v)_i = Σ_j ∂h_i/∂w_j · v_j)
    """
    n = len(h)
    result: VectorField = []
    for i in range(n):
        acc: Poly = {}
        for j in range(n):
            if not v[j]:
                continue
            partial = derivative(h[i], j, field)
            if partial:
                poly_add_into(acc, poly_mul(partial, v[j], field, max_degree), field)
        result.append(acc)
    return result


def compose(f: VectorField, h: VectorField, field, max_degree: int) -> VectorField:
    """
    f ∘ h を max_degree で打ち切って計算する (h(0) = 0 を仮定)

    Args:
        f (VectorField): 外側の写像
        h (VectorField): 内側の写像 (各成分の最低次数は 1 以上)
        field: 係数体
        max_degree (int): 打ち切り次数

    Returns:
        VectorField: 合成
    """
    n = len(h)
    powers: List[List[Poly]] = [[{(0,) * n: field.one}] for _ in range(n)]
    monomials: Dict[Exponents, Poly] = {}

    def power(j: int, e: int) -> Poly:
        while len(powers[j]) <= e:
            powers[j].append(poly_mul(powers[j][-1], h[j], field, max_degree))
        return powers[j][e]

    def monomial(exps: Exponents) -> Poly:
        if exps not in monomials:
            value: Poly = {(0,) * n: field.one}
            for j, e in enumerate(exps):
                if e:
                    value = poly_mul(value, power(j, e), field, max_degree)
            monomials[exps] = value
        return monomials[exps]

    result: VectorField = []
    for poly in f:
        acc: Poly = {}
        for exps, coeff in poly.items():
            if degree(exps) <= max_degree:
                poly_add_into(acc, monomial(exps), field, factor=coeff)
        result.append(acc)
    return result


def identity_map(n: int, field) -> VectorField:
    return [{unit(n, i): field.one} for i in range(n)]


def linear_map(matrix: Sequence[Sequence[object]], field) -> VectorField:
    """
    行列 M に対する写像 w ↦ M w
    """
    n = len(matrix)
    return [{unit(n, j): matrix[i][j] for j in range(n) if not field.is_zero(matrix[i][j])} for i in range(n)]


def with_linear_part(polys: VectorField, matrix: Sequence[Sequence[object]], field) -> VectorField:
    """
    線形部分を matrix で置き換えたベクトル場
    """
    n = len(polys)
    result = []
    for i, poly in enumerate(polys):
        replaced = {exps: coeff for exps, coeff in poly.items() if degree(exps) != 1}
        for j in range(n):
            if not field.is_zero(matrix[i][j]):
                replaced[unit(n, j)] = matrix[i][j]
        result.append(replaced)
    return result


def support(polys: VectorField) -> List[Tuple[int, Exponents]]:
    """係数が 0 でない (成分, 指数) の一覧 (成分は 0 始まり)"""
    return sorted((i, exps) for i, poly in enumerate(polys) for exps in poly)
