"""
多項式ベクトル場の germ を表現するクラス

θ = Σ f_i ∂/∂z_i の各成分 f_i を単項式の疎なリストとして保持する。
係数は浮動小数点値に加えて、任意で Gaussian 有理数の厳密値を持つ。
"""
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import QQ, QQ_I

from .errors import DimensionError, GermFormatError

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]
TermKey = Tuple[int, Exponents]


@dataclass(frozen=True)
class ComplexScalar:
    """
    複素数の係数

    Attributes:
        re (float): 実部
        im (float): 虚部
        exact (Optional[Tuple[Fraction, Fraction]]): 厳密な (実部, 虚部)。無い場合は None
    """
    re: float
    im: float
    exact: Optional[Tuple[Fraction, Fraction]] = None

    def __post_init__(self):
        if self.exact is not None:
            if float(self.exact[0]) != self.re or float(self.exact[1]) != self.im:
                raise GermFormatError(
                    f"厳密値と浮動小数点値が一致しません: {self.exact[0]}+{self.exact[1]}i と {self.re}+{self.im}i")

    @classmethod
    def from_fractions(cls, re: Fraction, im: Fraction = Fraction(0)) -> 'ComplexScalar':
        """
        厳密な実部・虚部から係数を作る

        Args:
            re (Fraction): 実部
            im (Fraction): 虚部

        Returns:
            ComplexScalar: 厳密値付きの係数
        """
        re, im = Fraction(re), Fraction(im)
        return cls(float(re), float(im), (re, im))

    @classmethod
    def from_complex(cls, value: complex) -> 'ComplexScalar':
        value = complex(value)
        return cls(value.real, value.imag)

    @classmethod
    def coerce(cls, value) -> 'ComplexScalar':
        """
        整数・分数・複素数・Gaussian 有理数のいずれかから係数を作る

        Args:
            value: 係数の値。整数と分数は厳密値、float と complex は数値として扱う

        Returns:
            ComplexScalar: 係数
        """
        if isinstance(value, ComplexScalar):
            return value
        if isinstance(value, (int, Fraction, Rational)) and not isinstance(value, bool):
            return cls.from_fractions(Fraction(value))
        if QQ_I.of_type(value):
            return cls.from_fractions(qq_to_fraction(value.x), qq_to_fraction(value.y))
        if isinstance(value, (float, complex, np.number)):
            return cls.from_complex(complex(value))
        raise GermFormatError(f"係数として解釈できません: {value!r}")

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def is_zero(self) -> bool:
        if self.exact is not None:
            return self.exact[0] == 0 and self.exact[1] == 0
        return self.re == 0.0 and self.im == 0.0

    def to_gaussian(self):
        """
        厳密値を sympy の Gaussian 有理数 (QQ_I の元) に変換する

        Returns:
            QQ_I の元

        Raises:
            ValueError: 厳密値を持たない場合
        """
        if self.exact is None:
            raise ValueError("厳密値を持たない係数です")
        return gaussian(self.exact[0], self.exact[1])

    def __add__(self, other: 'ComplexScalar') -> 'ComplexScalar':
        if self.exact is not None and other.exact is not None:
            return ComplexScalar.from_fractions(self.exact[0] + other.exact[0], self.exact[1] + other.exact[1])
        return ComplexScalar.from_complex(self.value + other.value)

    def __mul__(self, other: 'ComplexScalar') -> 'ComplexScalar':
        if self.exact is not None and other.exact is not None:
            a, b = self.exact
            c, d = other.exact
            return ComplexScalar.from_fractions(a * c - b * d, a * d + b * c)
        return ComplexScalar.from_complex(self.value * other.value)

    def reciprocal(self) -> 'ComplexScalar':
        if self.is_zero():
            raise ZeroDivisionError("0 の逆数はありません")
        if self.exact is not None:
            a, b = self.exact
            norm = a * a + b * b
            return ComplexScalar.from_fractions(a / norm, -b / norm)
        return ComplexScalar.from_complex(1 / self.value)

    def to_json(self) -> Dict:
        data = {"re": self.re, "im": self.im}
        if self.exact is not None:
            data["exact"] = [str(self.exact[0]), str(self.exact[1])]
        return data


def qq_to_fraction(value) -> Fraction:
    """sympy の QQ の元を Fraction に変換する"""
    return Fraction(int(QQ.numer(value)), int(QQ.denom(value)))


def gaussian(re, im=0):
    """
    実部・虚部 (整数または Fraction) から QQ_I の元を作る
    """
    re, im = Fraction(re), Fraction(im)
    return QQ_I(QQ(re.numerator, re.denominator), QQ(im.numerator, im.denominator))


@dataclass(frozen=True)
class MonomialTerm:
    """
    単項式の項 coeff · z^m (成分 component)

    Attributes:
        component (int): 成分の番号 (1 始まり)
        exponents (Tuple[int, ...]): 指数 m = (m_1, ..., m_n)
        coeff (ComplexScalar): 係数
    """
    component: int
    exponents: Exponents
    coeff: ComplexScalar

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def get_key(self) -> TermKey:
        return (self.component, self.exponents)


@dataclass(frozen=True)
class GermPoly:
    """
    多項式ベクトル場の germ

    Attributes:
        dimension (int): 変数の個数 n (2 以上)
        terms (Tuple[MonomialTerm, ...]): (成分, 指数) の順に整列した項
    """
    dimension: int
    terms: Tuple[MonomialTerm, ...]

    def __post_init__(self):
        n = self.dimension
        if n < 2:
            raise GermFormatError(f"次元は 2 以上である必要があります: n={n}")
        seen = set()
        for term in self.terms:
            if not 1 <= term.component <= n:
                raise GermFormatError(f"成分の番号が範囲外です: {term.component} (n={n})")
            if len(term.exponents) != n:
                raise GermFormatError(f"指数の長さが次元と一致しません: {term.exponents} (n={n})")
            if any(e < 0 for e in term.exponents):
                raise GermFormatError(f"指数は非負である必要があります: {term.exponents}")
            if term.degree == 0:
                raise GermFormatError(f"定数項は許されません (孤立特異点 0): 成分 {term.component}")
            if term.coeff.is_zero():
                raise GermFormatError(f"係数 0 の項は保持できません: 成分 {term.component}, 指数 {term.exponents}")
            key = term.get_key()
            if key in seen:
                raise GermFormatError(f"重複した項があります: 成分 {term.component}, 指数 {term.exponents}")
            seen.add(key)
        if not any(term.degree == 1 for term in self.terms):
            raise GermFormatError("線形部分が 0 です")
        object.__setattr__(self, 'terms', tuple(sorted(self.terms, key=MonomialTerm.get_key)))

    @classmethod
    def from_terms(cls, dimension: int, terms: Iterable[Tuple[int, Sequence[int], object]]) -> 'GermPoly':
        """
        (成分, 指数, 係数) の組から germ を作る

        Args:
            dimension (int): 次元
            terms: (成分 (1 始まり), 指数, 係数) の組の列。係数は ComplexScalar.coerce で変換する

        Returns:
            GermPoly: germ
        """
        return cls(dimension, tuple(
            MonomialTerm(int(component), tuple(int(e) for e in exponents), ComplexScalar.coerce(coeff))
            for component, exponents, coeff in terms))

    @cached_property
    def _lookup(self) -> Dict[TermKey, ComplexScalar]:
        return {term.get_key(): term.coeff for term in self.terms}

    def coefficient(self, component: int, exponents: Sequence[int]) -> Optional[ComplexScalar]:
        """
        (成分, 指数) の係数を取得する

        Args:
            component (int): 成分の番号 (1 始まり)
            exponents (Sequence[int]): 指数

        Returns:
            Optional[ComplexScalar]: 係数。項が無い場合は None
        """
        return self._lookup.get((component, tuple(exponents)))

    @property
    def is_exact(self) -> bool:
        return all(term.coeff.is_exact for term in self.terms)

    @property
    def degree(self) -> int:
        return max(term.degree for term in self.terms)

    def is_linear(self) -> bool:
        return self.degree == 1

    @cached_property
    def _arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        exps = np.array([term.exponents for term in self.terms], dtype=np.intp)
        coeffs = np.array([term.coeff.value for term in self.terms], dtype=complex)
        selector = np.zeros((len(self.terms), self.dimension), dtype=complex)
        selector[np.arange(len(self.terms)), [term.component - 1 for term in self.terms]] = 1.0
        return exps, coeffs, selector

    def evaluate(self, z) -> np.ndarray:
        """
        θ(z) を評価する

        Args:
            z: 長さ n の複素ベクトル

        Returns:
            np.ndarray: θ(z)
        """
        return self.evaluate_many(np.asarray(z, dtype=complex)[None, :])[0]

    def evaluate_many(self, points) -> np.ndarray:
        """
        複数の点で θ をまとめて評価する

        Args:
            points: 形状 (k, n) の複素配列

        Returns:
            np.ndarray: 形状 (k, n) の複素配列
        """
        points = np.asarray(points, dtype=complex)
        exps, coeffs, selector = self._arrays
        max_power = int(exps.max())
        # powers[d, k, j] = z_kj^d (0^0 = 1 を明示的に保つ)
        powers = np.ones((max_power + 1,) + points.shape, dtype=complex)
        for d in range(1, max_power + 1):
            powers[d] = powers[d - 1] * points
        columns = np.arange(self.dimension)
        # gathered[t, j, k] = z_kj^(m_tj)
        gathered = powers[exps, :, columns]
        monomials = np.prod(gathered, axis=1).T
        return (monomials * coeffs) @ selector

    def __str__(self) -> str:
        names = ['x', 'y'] if self.dimension == 2 else [f"z{k + 1}" for k in range(self.dimension)]
        parts = []
        for term in self.terms:
            monomial = '·'.join(f"{names[j]}^{e}" if e > 1 else names[j]
                                for j, e in enumerate(term.exponents) if e)
            parts.append(f"({term.coeff.value:g})·{monomial} ∂/∂{names[term.component - 1]}")
        return ' + '.join(parts)


def evaluate(germ: GermPoly, z) -> np.ndarray:
    """
    θ(z) を評価する

    Args:
        germ (GermPoly): germ
        z: 長さ n の複素ベクトル

    Returns:
        np.ndarray: θ(z)
    """
    z = np.asarray(z, dtype=complex)
    if z.shape != (germ.dimension,):
        raise DimensionError(f"点の次元が germ と一致しません: {z.shape} (n={germ.dimension})")
    return germ.evaluate(z)


def _parse_coeff(data, where: str) -> ComplexScalar:
    if not isinstance(data, dict) or 're' not in data or 'im' not in data:
        raise GermFormatError(f"{where}: coeff には re と im が必要です")
    re, im = data['re'], data['im']
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re, im)):
        raise GermFormatError(f"{where}: re と im は数値である必要があります")
    exact = data.get('exact')
    if exact is None:
        return ComplexScalar(float(re), float(im))
    if not isinstance(exact, list) or len(exact) != 2 or not all(isinstance(v, str) for v in exact):
        raise GermFormatError(f"{where}: exact は \"p/q\" 形式の文字列 2 つのリストである必要があります")
    try:
        exact_re, exact_im = Fraction(exact[0]), Fraction(exact[1])
    except ValueError as e:
        raise GermFormatError(f"{where}: exact を分数として解釈できません: {e}")
    scalar = ComplexScalar.from_fractions(exact_re, exact_im)
    if scalar.re != float(re) or scalar.im != float(im):
        raise GermFormatError(f"{where}: exact と re/im が一致しません")
    return scalar


def parse_germ(text: str) -> GermPoly:
    """
    germ ファイルの内容を解析する

    Args:
        text (str): UTF-8 の JSON テキスト

    Returns:
        GermPoly: 解析した germ

    Raises:
        GermFormatError: 構文エラー・重複した項・次元の不整合の場合
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise GermFormatError(f"JSON の構文エラー: {e.msg}", line=e.lineno, column=e.colno)

    if not isinstance(data, dict) or 'n' not in data or 'terms' not in data:
        raise GermFormatError("germ には n と terms が必要です")
    n = data['n']
    if not isinstance(n, int) or isinstance(n, bool):
        raise GermFormatError(f"n は整数である必要があります: {n!r}")
    if n <= 0:
        raise GermFormatError(f"次元が 0 以下です: n={n}")
    if not isinstance(data['terms'], list):
        raise GermFormatError("terms はリストである必要があります")

    terms: List[MonomialTerm] = []
    for index, item in enumerate(data['terms']):
        where = f"terms[{index}]"
        if not isinstance(item, dict):
            raise GermFormatError(f"{where}: 項はオブジェクトである必要があります")
        component, exponents = item.get('component'), item.get('exponents')
        if not isinstance(component, int) or isinstance(component, bool):
            raise GermFormatError(f"{where}: component は整数である必要があります")
        if not isinstance(exponents, list) or not all(isinstance(e, int) and not isinstance(e, bool) for e in exponents):
            raise GermFormatError(f"{where}: exponents は整数のリストである必要があります")
        if len(exponents) != n:
            raise GermFormatError(f"{where}: 指数の長さ {len(exponents)} が次元 {n} と一致しません")
        terms.append(MonomialTerm(component, tuple(exponents), _parse_coeff(item.get('coeff'), where)))

    germ = GermPoly(n, tuple(terms))
    logger.debug(f"germ を読み込みました: n={n}, 項数={len(germ.terms)}, 厳密={germ.is_exact}")
    return germ


def serialize_germ(germ: GermPoly) -> str:
    """
    germ を正規化した JSON テキストに変換する (項は (成分, 指数) の順)

    Args:
        germ (GermPoly): germ

    Returns:
        str: JSON テキスト
    """
    data = germ_to_json(germ)
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def germ_to_json(germ: GermPoly) -> Dict:
    return {
        "n": germ.dimension,
        "terms": [
            {"component": term.component, "exponents": list(term.exponents), "coeff": term.coeff.to_json()}
            for term in germ.terms
        ],
    }


def load_germ(path: str) -> GermPoly:
    """
    germ ファイルを読み込む

    Args:
        path (str): ファイルパス

    Returns:
        GermPoly: germ

    Raises:
        FileNotFoundError: ファイルが見つからない場合
        GermFormatError: 形式エラーの場合
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except FileNotFoundError:
        raise FileNotFoundError(f"germ ファイルが見つかりません: {path}")
    return parse_germ(text)


def save_germ(germ: GermPoly, path: str) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        f.write(serialize_germ(germ))


def _rebuild(dimension: int, coefficients: Dict[TermKey, ComplexScalar]) -> GermPoly:
    return GermPoly(dimension, tuple(
        MonomialTerm(component, exponents, coeff)
        for (component, exponents), coeff in coefficients.items() if not coeff.is_zero()))


def merge_germs(g1: GermPoly, g2: GermPoly) -> GermPoly:
    """
    2 つの germ の項を足し合わせる (同じ (成分, 指数) の係数は加算し、0 になった項は除く)

    Args:
        g1 (GermPoly): 1 つ目の germ
        g2 (GermPoly): 2 つ目の germ

    Returns:
        GermPoly: 和の germ
    """
    if g1.dimension != g2.dimension:
        raise DimensionError(f"次元が異なります: {g1.dimension} と {g2.dimension}")
    merged: Dict[TermKey, ComplexScalar] = dict(g1._lookup)
    for key, coeff in g2._lookup.items():
        merged[key] = merged[key] + coeff if key in merged else coeff
    return _rebuild(g1.dimension, merged)


def scale_germ(germ: GermPoly, factor) -> GermPoly:
    """
    ベクトル場を 0 でない定数倍する

    Args:
        germ (GermPoly): germ
        factor: 定数 (ComplexScalar.coerce で解釈できる値)

    Returns:
        GermPoly: 定数倍した germ
    """
    factor = ComplexScalar.coerce(factor)
    if factor.is_zero():
        raise ValueError("0 倍は germ の同値変換ではありません")
    return _rebuild(germ.dimension, {key: coeff * factor for key, coeff in germ._lookup.items()})


def swap_coordinates(germ: GermPoly, perm: Optional[Sequence[int]] = None) -> GermPoly:
    """
    座標を並べ替える。新しい座標 u_k は元の座標 z_{perm[k]} (0 始まり)

    Args:
        germ (GermPoly): germ
        perm (Optional[Sequence[int]]): 置換。省略した場合は最初の 2 座標を入れ替える

    Returns:
        GermPoly: 座標を並べ替えた germ
    """
    n = germ.dimension
    if perm is None:
        perm = (1, 0) + tuple(range(2, n))
    perm = tuple(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"置換ではありません: {perm}")
    inverse = {old: new for new, old in enumerate(perm)}
    swapped = {
        (inverse[term.component - 1] + 1, tuple(term.exponents[perm[k]] for k in range(n))): term.coeff
        for term in germ.terms
    }
    return _rebuild(n, swapped)
