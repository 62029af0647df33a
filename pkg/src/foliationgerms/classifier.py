"""
位相同値性の判定

2 次元では標準形から同値類 (Generic / Rational / Irrational / Resonant) を決める。
3 次元以上では半直線配置と各半直線への制限の比較による予想に基づく判定を行う。
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import sympy
from sympy import QQ_I
from sympy.ntheory.continued_fraction import continued_fraction_convergents, continued_fraction_iterator

from .config import get_config
from .errors import DimensionError, NotPoincareError, RationalityUndecidedError
from .germ import GermPoly, MonomialTerm, qq_to_fraction
from .normal_form import canonical_form_2d, poincare_dulac
from .spectral import (RayConfiguration, algebraic_is_zero, linear_part, ray_config_equivalent, ray_configuration,
                       spectrum, to_complex)

logger = logging.getLogger(__name__)

GENERIC = 'Generic'
RATIONAL = 'Rational'
IRRATIONAL = 'Irrational'
RESONANT = 'Resonant'

EQUIVALENT = 'Equivalent'
NOT_EQUIVALENT = 'NotEquivalent'
UNKNOWN = 'Unknown'

# 数値の無理数 λ を同じとみなす相対許容誤差
IRRATIONAL_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class EquivClass2D:
    """
    2 次元の位相同値類

    Attributes:
        tag (str): 'Generic' / 'Rational' / 'Irrational' / 'Resonant'
        p (Optional[int]): Rational の分子 (p >= q)
        q (Optional[int]): Rational の分母
        value (Optional[float]): Irrational の λ (>= 1)
        exact (bool): 厳密 (代数的) に判定した場合に True
        m (Optional[int]): Resonant の m
        expression (Optional[str]): 厳密な無理数 λ の式
        certificate (Tuple[str, ...]): 判定の根拠
        witness (Optional[Tuple[int, int]]): 数値の有理性判定で最良だった連分数近似
        witness_error (Optional[float]): |λ - p/q|·q^2
    """
    tag: str
    p: Optional[int] = None
    q: Optional[int] = None
    value: Optional[float] = None
    exact: bool = True
    m: Optional[int] = None
    expression: Optional[str] = None
    certificate: Tuple[str, ...] = field(default=())
    witness: Optional[Tuple[int, int]] = None
    witness_error: Optional[float] = None

    def __eq__(self, other) -> bool:
        """
        同値類としての等価比較 (根拠や経路は比較しない)
        """
        if not isinstance(other, EquivClass2D) or self.tag != other.tag:
            return False
        if self.tag == RATIONAL:
            return (self.p, self.q) == (other.p, other.q)
        if self.tag == RESONANT:
            return self.m == other.m
        if self.tag == IRRATIONAL:
            if self.exact and other.exact and self.expression and other.expression:
                return algebraic_is_zero(sympy.sympify(self.expression) - sympy.sympify(other.expression))
            return abs(self.value - other.value) <= IRRATIONAL_TOLERANCE * max(1.0, abs(self.value))
        return True

    def __hash__(self):
        return hash(self.tag)

    def label(self) -> str:
        if self.tag == RATIONAL:
            return f"Rational({self.p},{self.q})"
        if self.tag == RESONANT:
            return f"Resonant({self.m})"
        if self.tag == IRRATIONAL:
            return f"Irrational({self.value:.12g})"
        return GENERIC

    def to_json(self) -> Dict:
        data = {"class": self.tag, "exact": self.exact, "certificate": list(self.certificate)}
        if self.tag == RATIONAL:
            data.update(p=self.p, q=self.q)
        elif self.tag == RESONANT:
            data.update(m=self.m)
        elif self.tag == IRRATIONAL:
            data.update(value=self.value)
            if self.expression is not None:
                data.update(expression=self.expression)
        if self.witness is not None:
            data.update(witness=list(self.witness), witness_error=self.witness_error)
        return data


@dataclass(frozen=True)
class EquivalenceResult:
    """
    2 次元の同値判定の結果

    Attributes:
        equivalent (Optional[bool]): 同値なら True。有理性を判定できない場合は None
        certificate (Tuple[str, ...]): 判定の根拠
        classes (Tuple[Optional[EquivClass2D], Optional[EquivClass2D]]): 各 germ の同値類
    """
    equivalent: Optional[bool]
    certificate: Tuple[str, ...]
    classes: Tuple[Optional[EquivClass2D], Optional[EquivClass2D]]


@dataclass(frozen=True)
class NdVerdict:
    """
    n 次元の判定結果

    Attributes:
        result (str): 'Equivalent' / 'NotEquivalent' / 'Unknown'
        reasons (Tuple[str, ...]): 半直線配置の比較と半直線ごとの判定の根拠
    """
    result: str
    reasons: Tuple[str, ...]


@dataclass(frozen=True)
class RationalityDecision:
    """数値の λ の有理性判定"""
    fraction: Optional[Fraction]
    witness: Tuple[int, int]
    error: float


def decide_rationality(value: float, max_denominator: Optional[int] = None, accept: Optional[float] = None,
                       undecided_band: Optional[float] = None) -> RationalityDecision:
    """
    連分数展開で数値 λ が有理数かを判定する

    分母が max_denominator 以下の近似分数 p/q で |λ - p/q| < accept/q^2 となれば有理数とする。
    そうでなく、最良の近似の q^2 誤差が undecided_band 未満の場合は判定不能とする。

    Args:
        value (float): λ
        max_denominator (Optional[int]): 分母の上限
        accept (Optional[float]): 受理の許容誤差
        undecided_band (Optional[float]): 判定不能とする誤差の上限

    Returns:
        RationalityDecision: 有理数なら fraction に値が入る

    Raises:
        RationalityUndecidedError: 判定できない場合
    """
    config = get_config()
    max_denominator = config.get_max_denominator() if max_denominator is None else max_denominator
    accept = config.get_rational_accept() if accept is None else accept
    undecided_band = config.get_undecided_band() if undecided_band is None else undecided_band

    exact_value = Fraction(value)
    best: Optional[Tuple[float, Tuple[int, int]]] = None
    terms = continued_fraction_iterator(sympy.Rational(exact_value.numerator, exact_value.denominator))
    for convergent in continued_fraction_convergents(terms):
        p, q = int(convergent.p), int(convergent.q)
        if q > max_denominator:
            break
        error = float(abs(exact_value - Fraction(p, q)) * q * q)
        if error < accept:
            return RationalityDecision(Fraction(p, q), (p, q), error)
        if best is None or error < best[0]:
            best = (error, (p, q))

    if best is None:
        best = (float('inf'), (round(value), 1))
    if best[0] < undecided_band:
        raise RationalityUndecidedError(value, best[1], best[0])
    return RationalityDecision(None, best[1], best[0])


def _fraction_of(value) -> Optional[Fraction]:
    if QQ_I.of_type(value):
        return qq_to_fraction(value.x)
    if isinstance(value, sympy.Basic):
        real = sympy.re(value)
        if real.is_rational:
            return Fraction(int(real.p), int(real.q))
    return None


def classify_2d(germ: GermPoly) -> EquivClass2D:
    """
    2 次元の Poincaré 型 germ の位相同値類を決める

    Args:
        germ (GermPoly): n = 2 の germ

    Returns:
        EquivClass2D: 同値類

    Raises:
        DimensionError: n != 2 の場合
        NotPoincareError: Poincaré 型でない場合
        RationalityUndecidedError: 数値経路で λ の有理性を判定できない場合
    """
    if germ.dimension != 2:
        raise DimensionError(f"2 次元の germ が必要です: n={germ.dimension}")
    form = canonical_form_2d(germ)

    if form.kind == 4:
        return EquivClass2D(RESONANT, m=1, exact=germ.is_exact,
                            certificate=("線形部分が Jordan 型 (λ = 1)",))
    if form.kind == 3:
        return EquivClass2D(RESONANT, m=form.parameter, exact=germ.is_exact,
                            certificate=(f"λ = {form.parameter} で y^{form.parameter} の係数 "
                                         f"{form.original_coefficient.value:.6g} が 0 でない",))
    if form.kind == 1:
        ratio = to_complex(form.parameter)
        return EquivClass2D(GENERIC, exact=not isinstance(form.parameter, complex),
                            certificate=(f"λ = {ratio:.12g} は実数でない",))

    parameter = form.parameter
    if QQ_I.of_type(parameter) or isinstance(parameter, sympy.Basic):
        fraction = _fraction_of(parameter)
        if fraction is not None:
            return EquivClass2D(RATIONAL, p=fraction.numerator, q=fraction.denominator, exact=True,
                                certificate=(f"λ = {fraction} (厳密)、共鳴項なし",))
        real = sympy.re(parameter)
        if real.is_rational is False:
            return EquivClass2D(IRRATIONAL, value=float(sympy.N(real, 30)), exact=True, expression=str(real),
                                certificate=(f"λ = {real} は無理数 (厳密)",))

    value = to_complex(parameter).real
    decision = decide_rationality(value)
    if decision.fraction is not None:
        p, q = decision.fraction.numerator, decision.fraction.denominator
        logger.info(f"λ={value!r} を有理数 {p}/{q} と判定しました (q^2 誤差 {decision.error:.3e})")
        return EquivClass2D(RATIONAL, p=p, q=q, exact=False, witness=decision.witness, witness_error=decision.error,
                            certificate=(f"λ ≈ {p}/{q} (連分数、q^2 誤差 {decision.error:.3e})",))
    logger.info(f"λ={value!r} を無理数と判定しました (最良近似 {decision.witness}, q^2 誤差 {decision.error:.3e})")
    return EquivClass2D(IRRATIONAL, value=value, exact=False, witness=decision.witness,
                        witness_error=decision.error,
                        certificate=(f"分母 {get_config().get_max_denominator()} 以下に近似分数なし "
                                     f"(最良 {decision.witness[0]}/{decision.witness[1]})",))


def equivalent_2d(g1: GermPoly, g2: GermPoly) -> EquivalenceResult:
    """
    2 つの 2 次元 germ が位相同値かを判定する

    Args:
        g1 (GermPoly): 1 つ目の germ
        g2 (GermPoly): 2 つ目の germ

    Returns:
        EquivalenceResult: 判定結果。有理性を判定できない場合 equivalent は None
    """
    classes: List[Optional[EquivClass2D]] = []
    certificate: List[str] = []
    for index, germ in enumerate((g1, g2), start=1):
        try:
            cls = classify_2d(germ)
        except RationalityUndecidedError as e:
            classes.append(None)
            certificate.append(f"germ {index}: 有理性を判定できません (近似 {e.witness[0]}/{e.witness[1]}, "
                               f"q^2 誤差 {e.error:.3e})")
            continue
        classes.append(cls)
        certificate.append(f"germ {index}: {cls.label()}")
    if None in classes:
        return EquivalenceResult(None, tuple(certificate), tuple(classes))
    equivalent = classes[0] == classes[1]
    certificate.append("同値類が一致" if equivalent else "同値類が異なる")
    return EquivalenceResult(equivalent, tuple(certificate), tuple(classes))


def pairwise_R_independent(eigs) -> bool:
    """
    固有値が 2 つずつ R 上一次独立か (半直線配置のすべての部分が 1 点か)
    """
    return all(size == 1 for size in ray_configuration(eigs).sizes)


def restrict_to_coordinates(germ: GermPoly, coordinates: Sequence[int]) -> GermPoly:
    """
    germ を座標部分空間 {z_j = 0 (j ∉ coordinates)} に制限する

    Args:
        germ (GermPoly): germ
        coordinates (Sequence[int]): 残す座標 (0 始まり)

    Returns:
        GermPoly: 制限した germ (次元は len(coordinates))
    """
    coordinates = list(coordinates)
    position = {old: new for new, old in enumerate(coordinates)}
    terms = [
        MonomialTerm(position[term.component - 1] + 1, tuple(term.exponents[j] for j in coordinates), term.coeff)
        for term in germ.terms
        if term.component - 1 in position
        and all(e == 0 for j, e in enumerate(term.exponents) if j not in position)
    ]
    return GermPoly(len(coordinates), tuple(terms))


def _same_up_to_scalar(first: Sequence[object], second: Sequence[object]) -> bool:
    """2 つの固有値の多重集合が共通の複素数倍を除いて一致するか"""
    a = [to_complex(v) for v in first]
    b = [to_complex(v) for v in second]
    exact = all(QQ_I.of_type(v) for v in list(first) + list(second))
    tolerance = get_config().get_ray_tolerance()
    for candidate in range(len(a)):
        if exact:
            scale = second[0] / first[candidate]
            remaining = list(second)
            matched = True
            for value in first:
                image = scale * value
                hit = next((k for k, w in enumerate(remaining) if not (w - image)), None)
                if hit is None:
                    matched = False
                    break
                remaining.pop(hit)
        else:
            scale = b[0] / a[candidate]
            remaining_c = list(b)
            matched = True
            for value in a:
                image = scale * value
                hit = next((k for k, w in enumerate(remaining_c)
                            if abs(w - image) <= tolerance * (1 + abs(image))), None)
                if hit is None:
                    matched = False
                    break
                remaining_c.pop(hit)
        if matched:
            return True
    return False


def _part_check(part1: GermPoly, eigs1, part2: GermPoly, eigs2) -> Tuple[Optional[bool], str]:
    size = part1.dimension
    if size == 2:
        try:
            c1, c2 = classify_2d(part1), classify_2d(part2)
        except RationalityUndecidedError as e:
            return None, f"2 次元の制限で有理性を判定できません ({e.witness[0]}/{e.witness[1]})"
        return c1 == c2, f"2 次元の制限: {c1.label()} と {c2.label()}"
    diagonal1 = part1.is_linear() and not any(linear_part(part1).superdiagonal_flags())
    diagonal2 = part2.is_linear() and not any(linear_part(part2).superdiagonal_flags())
    if diagonal1 and diagonal2:
        same = _same_up_to_scalar(eigs1, eigs2)
        return same, f"対角線形な {size} 次元の制限: 固有値が共通の定数倍で{'一致' if same else '一致しない'}"
    return None, f"{size} 次元の制限に共鳴項または Jordan 型があり、判定できません"


def conjectured_equivalent_nd(g1: GermPoly, g2: GermPoly) -> NdVerdict:
    """
    n 次元の germ の位相同値性を予想に基づいて判定する

    半直線配置が同値でなければ NotEquivalent。すべての部分が 1 点なら Equivalent。
    それ以外では、対応する半直線ごとに正規形の制限を比較する。
    どれか 1 つでも判定できない比較があれば Unknown を返す。

    Args:
        g1 (GermPoly): 1 つ目の germ
        g2 (GermPoly): 2 つ目の germ

    Returns:
        NdVerdict: 判定結果と根拠
    """
    if g1.dimension != g2.dimension:
        return NdVerdict(NOT_EQUIVALENT, (f"次元が異なります: {g1.dimension} と {g2.dimension}",))
    for index, germ in enumerate((g1, g2), start=1):
        if not spectrum(germ).poincare:
            raise NotPoincareError(f"germ {index} は Poincaré 型ではありません")

    nf1, nf2 = poincare_dulac(g1), poincare_dulac(g2)
    r1, r2 = ray_configuration(nf1.eigenvalues), ray_configuration(nf2.eigenvalues)
    reasons = [f"半直線配置の大きさ: {list(r1.sizes)} と {list(r2.sizes)}"]
    if not ray_config_equivalent(r1, r2):
        reasons.append("半直線配置が同値でない")
        return NdVerdict(NOT_EQUIVALENT, tuple(reasons))
    if all(size == 1 for size in r1.sizes):
        reasons.append("固有値が 2 つずつ R 上一次独立 (すべての部分が 1 点)")
        return NdVerdict(EQUIVALENT, tuple(reasons))

    orientations: List[Tuple[str, RayConfiguration]] = []
    if r1.sizes == r2.sizes:
        orientations.append(("同じ向き", r2))
    reversed_parts = RayConfiguration(tuple(reversed(r2.parts)), tuple(reversed(r2.angles)))
    if r1.sizes == reversed_parts.sizes:
        orientations.append(("逆向き", reversed_parts))

    outcomes: List[Optional[bool]] = []
    for name, matched in orientations:
        decided: List[Optional[bool]] = []
        for part1, part2 in zip(r1.parts, matched.parts):
            if len(part1) == 1:
                decided.append(True)
                continue
            restricted1 = restrict_to_coordinates(nf1.normal, part1)
            restricted2 = restrict_to_coordinates(nf2.normal, part2)
            result, reason = _part_check(restricted1, [nf1.eigenvalues[k] for k in part1],
                                         restricted2, [nf2.eigenvalues[k] for k in part2])
            decided.append(result)
            reasons.append(f"{name}: 座標 {[k + 1 for k in part1]} と {[k + 1 for k in part2]}: {reason}")
        if None in decided:
            outcomes.append(None)
        else:
            outcomes.append(all(decided))

    if None in outcomes:
        return NdVerdict(UNKNOWN, tuple(reasons))
    if any(outcomes):
        return NdVerdict(EQUIVALENT, tuple(reasons))
    return NdVerdict(NOT_EQUIVALENT, tuple(reasons))


def class_signature(cls: EquivClass2D) -> Dict[str, str]:
    """
    同値類から予想される球面トレースの性質

    Returns:
        Dict[str, str]: closed_leaves ('axes': 座標軸上の 2 本だけ, 'all': すべて, 'y=0': {y=0} だけ)、
            profile ('Monotone' / 'Constant' / 'UniqueMax')
    """
    if cls.tag == GENERIC:
        return {"closed_leaves": "axes", "profile": "Monotone"}
    if cls.tag == RATIONAL:
        return {"closed_leaves": "all", "profile": "Constant"}
    if cls.tag == IRRATIONAL:
        return {"closed_leaves": "axes", "profile": "Constant"}
    return {"closed_leaves": "y=0", "profile": "UniqueMax"}
