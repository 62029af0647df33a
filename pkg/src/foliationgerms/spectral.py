"""
線形部分・固有値・Poincaré 判定・定数 c・半直線配置

固有値は 3 種類の表現を取る:
  - 'exact': sympy の QQ_I の元 (Gaussian 有理数)
  - 'algebraic': sympy の式 (2×2 で判別式が平方でない場合の平方根を含む値)
  - 'numeric': complex
"""
import cmath
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from sympy import QQ_I, integer_nthroot
from sympy.polys.polyerrors import CoercionFailed

from .config import get_config
from .errors import DimensionError, EigenvalueError, NotPoincareError
from .germ import GermPoly, gaussian, qq_to_fraction
from .polynomial import EXACT, unit

logger = logging.getLogger(__name__)

EXACT_PATH = 'exact'
ALGEBRAIC_PATH = 'algebraic'
NUMERIC_PATH = 'numeric'

# 凸包の距離がこれ以下なら 0 が凸包に含まれるとみなす (数値・代数的経路)
HULL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class LinearPart:
    """
    線形部分 A (A[i][j] = 成分 i における z_j の係数)

    Attributes:
        matrix (Tuple[Tuple, ...]): 行列。厳密な場合は QQ_I の元、それ以外は complex
        exact (bool): 厳密な行列かどうか
    """
    matrix: Tuple[Tuple[object, ...], ...]
    exact: bool

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[object]]) -> 'LinearPart':
        """
        行のリストから線形部分を作る。整数と分数だけなら厳密、float や complex を含めば数値

        Args:
            rows: 正方行列の行

        Returns:
            LinearPart: 線形部分
        """
        exact = all(_is_exact_number(v) for row in rows for v in row)
        if exact:
            matrix = tuple(tuple(EXACT.convert(v) for v in row) for row in rows)
        else:
            matrix = tuple(tuple(complex(EXACT.to_complex(v)) if QQ_I.of_type(v) else complex(v) for v in row)
                           for row in rows)
        if any(len(row) != len(matrix) for row in matrix):
            raise DimensionError("線形部分は正方行列である必要があります")
        return cls(matrix, exact)

    @property
    def n(self) -> int:
        return len(self.matrix)

    def is_zero_entry(self, i: int, j: int) -> bool:
        value = self.matrix[i][j]
        return not value if self.exact else value == 0

    def to_numpy(self) -> np.ndarray:
        if self.exact:
            return np.array([[EXACT.to_complex(v) for v in row] for row in self.matrix], dtype=complex)
        return np.array(self.matrix, dtype=complex)

    def to_sympy(self) -> sympy.Matrix:
        if not self.exact:
            raise ValueError("数値の線形部分は sympy の行列に変換できません")
        return sympy.Matrix([[QQ_I.to_sympy(v) for v in row] for row in self.matrix])

    def diagonal(self) -> Tuple[object, ...]:
        return tuple(self.matrix[i][i] for i in range(self.n))

    def is_upper_triangular(self) -> bool:
        return all(self.is_zero_entry(i, j) for i in range(self.n) for j in range(i))

    def is_lower_triangular(self) -> bool:
        return all(self.is_zero_entry(i, j) for i in range(self.n) for j in range(i + 1, self.n))

    def is_triangular(self) -> bool:
        return self.is_upper_triangular() or self.is_lower_triangular()

    def is_jordan(self, tolerance: Optional[float] = None) -> bool:
        """
        (スケールされた) Jordan 標準形かどうか

        上二重対角で、0 でない優対角成分が等しい対角成分の間にだけある場合に True。
        優対角成分の値は 1 でなくてもよい (c/(2n) への正規化を許す)。

        Args:
            tolerance (Optional[float]): 数値の場合に対角成分を等しいとみなす相対許容誤差

        Returns:
            bool: Jordan 標準形なら True
        """
        n = self.n
        for i in range(n):
            for j in range(n):
                if j != i and j != i + 1 and not self.is_zero_entry(i, j):
                    return False
        for i in range(n - 1):
            if self.is_zero_entry(i, i + 1):
                continue
            a, b = self.matrix[i][i], self.matrix[i + 1][i + 1]
            if self.exact:
                if a - b:
                    return False
            else:
                tol = get_config().get_cluster_tolerance() if tolerance is None else tolerance
                if abs(a - b) > tol * (1 + abs(a)):
                    return False
        return True

    def superdiagonal_flags(self) -> Tuple[int, ...]:
        return tuple(0 if self.is_zero_entry(i, i + 1) else 1 for i in range(self.n - 1))


@dataclass(frozen=True)
class EigenSolution:
    """
    固有値計算の結果

    Attributes:
        values (Tuple): 固有値 (偏角 [0, 2π) の昇順、同じ偏角なら絶対値の昇順)
        path (str): 'exact' / 'algebraic' / 'numeric'
        residual (float): 特性多項式の相対残差 (厳密な場合は 0)
    """
    values: Tuple[object, ...]
    path: str
    residual: float = 0.0


@dataclass(frozen=True)
class Spectrum:
    """
    線形部分のスペクトル

    Attributes:
        eigenvalues (Tuple): 重複度込みの固有値 (偏角の昇順、次に絶対値の昇順)
        poincare (bool): 0 が固有値の凸包に含まれない場合に True
        c (Union[Fraction, float]): 0 から凸包までの距離 (Poincaré でない場合は 0)
        c_squared (Union[Fraction, float]): c の 2 乗 (厳密な場合は Fraction)
        jordan_superdiagonal (Tuple[int, ...]): Jordan 標準形の優対角成分の 0/1 フラグ
        path (str): 判定に使った経路
        residual (float): 固有値計算の残差
    """
    eigenvalues: Tuple[object, ...]
    poincare: bool
    c: Union[Fraction, float]
    c_squared: Union[Fraction, float]
    jordan_superdiagonal: Tuple[int, ...]
    path: str
    residual: float = 0.0

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class RayConfiguration:
    """
    固有値の半直線配置

    Attributes:
        parts (Tuple[Tuple[int, ...], ...]): 同じ半直線上の固有値の番号 (0 始まり) の組
        angles (Tuple[float, ...]): 各半直線の偏角 ([0, 2π) の昇順)
    """
    parts: Tuple[Tuple[int, ...], ...]
    angles: Tuple[float, ...]

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(part) for part in self.parts)


def _is_exact_number(value) -> bool:
    if isinstance(value, bool):
        return False
    return isinstance(value, (int, Fraction)) or QQ_I.of_type(value)


def canonical_algebraic(value) -> sympy.Expr:
    return sympy.expand(sympy.radsimp(value))


def as_eigenvalue(value):
    """
    固有値を 3 種類の表現のいずれかに正規化する

    Args:
        value: 整数・Fraction・QQ_I の元・sympy の式・float・complex

    Returns:
        QQ_I の元、sympy の式、または complex
    """
    if QQ_I.of_type(value):
        return value
    if _is_exact_number(value):
        return gaussian(value)
    if isinstance(value, sympy.Basic):
        expr = canonical_algebraic(value)
        try:
            return QQ_I.from_sympy(expr)
        except CoercionFailed:
            return expr
    return complex(value)


def as_eigenvalues(values) -> Tuple[object, ...]:
    """
    固有値の列を同じ種類の表現に揃える

    数値が 1 つでも含まれれば全体を complex に、sympy の式が含まれれば全体を sympy の式にする。

    Args:
        values: 固有値の列、または Spectrum

    Returns:
        Tuple: 正規化した固有値
    """
    if isinstance(values, Spectrum):
        return values.eigenvalues
    converted = [as_eigenvalue(v) for v in values]
    kinds = {value_kind(v) for v in converted}
    if NUMERIC_PATH in kinds:
        return tuple(to_complex(v) for v in converted)
    if ALGEBRAIC_PATH in kinds:
        return tuple(QQ_I.to_sympy(v) if QQ_I.of_type(v) else v for v in converted)
    return tuple(converted)


def value_kind(value) -> str:
    if QQ_I.of_type(value):
        return EXACT_PATH
    if isinstance(value, sympy.Basic):
        return ALGEBRAIC_PATH
    return NUMERIC_PATH


def eigen_path(values: Sequence[object]) -> str:
    kinds = {value_kind(v) for v in values}
    for path in (NUMERIC_PATH, ALGEBRAIC_PATH):
        if path in kinds:
            return path
    return EXACT_PATH


def to_complex(value) -> complex:
    if QQ_I.of_type(value):
        return EXACT.to_complex(value)
    if isinstance(value, sympy.Basic):
        return complex(sympy.N(value, 30))
    return complex(value)


def argument(value) -> float:
    """偏角 ([0, 2π))"""
    return cmath.phase(to_complex(value)) % (2 * math.pi)


def spectrum_key(value) -> Tuple[float, float]:
    z = to_complex(value)
    return (argument(z), abs(z))


def rational_sqrt(value: Fraction) -> Optional[Fraction]:
    """
    有理数の平方根が有理数ならそれを返す

    Args:
        value (Fraction): 非負の有理数

    Returns:
        Optional[Fraction]: 平方根。有理数でない場合は None
    """
    value = Fraction(value)
    if value < 0:
        return None
    num, num_exact = integer_nthroot(value.numerator, 2)
    den, den_exact = integer_nthroot(value.denominator, 2)
    if num_exact and den_exact:
        return Fraction(num, den)
    return None


def gaussian_sqrt(value):
    """
    Gaussian 有理数の平方根が Gaussian 有理数ならそれを返す

    Args:
        value: QQ_I の元

    Returns:
        Optional: 平方根 (QQ_I の元)。存在しない場合は None
    """
    a, b = qq_to_fraction(value.x), qq_to_fraction(value.y)
    if b == 0:
        if a >= 0:
            r = rational_sqrt(a)
            return None if r is None else gaussian(r)
        r = rational_sqrt(-a)
        return None if r is None else gaussian(0, r)
    norm = rational_sqrt(a * a + b * b)
    if norm is None:
        return None
    x = rational_sqrt((norm + a) / 2)
    if x is None:
        return None
    return gaussian(x, b / (2 * x))


def linear_part(germ: GermPoly) -> LinearPart:
    """
    germ の線形部分を取り出す

    Args:
        germ (GermPoly): germ

    Returns:
        LinearPart: A[i][j] = 成分 i における z_j の係数
    """
    n = germ.dimension
    exact = germ.is_exact
    zero = EXACT.zero if exact else 0j
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            coeff = germ.coefficient(i + 1, unit(n, j))
            if coeff is None:
                row.append(zero)
            else:
                row.append(coeff.to_gaussian() if exact else coeff.value)
        rows.append(tuple(row))
    return LinearPart(tuple(rows), exact)


def _numeric_roots(matrix: np.ndarray, cluster_tolerance: float) -> Tuple[np.ndarray, float]:
    coeffs = np.poly(matrix)
    deriv = np.polyder(coeffs)
    roots = np.roots(coeffs).astype(complex)
    n = len(coeffs) - 1

    polished = []
    for root in roots:
        value = np.polyval(coeffs, root)
        for _ in range(50):
            slope = np.polyval(deriv, root)
            if slope == 0:
                break
            candidate = root - value / slope
            candidate_value = np.polyval(coeffs, candidate)
            if abs(candidate_value) >= abs(value):
                break
            root, value = candidate, candidate_value
        polished.append(root)
    roots = np.array(polished, dtype=complex)

    scale = np.sum(np.abs(coeffs)) * np.maximum(1.0, np.abs(roots)) ** n
    residual = float(np.max(np.abs(np.polyval(coeffs, roots)) / scale)) if n else 0.0

    # 重根のまわりに散った根を平均値にまとめる
    clustered = roots.copy()
    assigned = np.zeros(len(roots), dtype=bool)
    for i in range(len(roots)):
        if assigned[i]:
            continue
        members = [j for j in range(len(roots))
                   if not assigned[j] and abs(roots[j] - roots[i]) <= cluster_tolerance * (1 + abs(roots[i]))]
        assigned[members] = True
        clustered[members] = np.mean(roots[members])

    snapped = []
    for root in clustered:
        size = max(1.0, abs(root))
        re = 0.0 if abs(root.real) <= 1e-14 * size else root.real
        im = 0.0 if abs(root.imag) <= 1e-14 * size else root.imag
        snapped.append(complex(re, im))
    return np.array(snapped, dtype=complex), residual


def eigen_solution(A: LinearPart, cluster_tolerance: Optional[float] = None) -> EigenSolution:
    """
    固有値を計算し、計算経路と残差を合わせて返す

    Args:
        A (LinearPart): 線形部分
        cluster_tolerance (Optional[float]): 数値固有値を重根とみなす相対許容誤差

    Returns:
        EigenSolution: 固有値・経路・残差

    Raises:
        DimensionError: 次元が上限を超える場合
        EigenvalueError: 数値計算が収束しない場合
    """
    config = get_config()
    if A.n > config.get_max_dimension():
        raise DimensionError(f"次元 {A.n} は上限 {config.get_max_dimension()} を超えています")
    if cluster_tolerance is None:
        cluster_tolerance = config.get_cluster_tolerance()

    if A.is_triangular():
        values = A.diagonal()
        path = EXACT_PATH if A.exact else NUMERIC_PATH
        return EigenSolution(tuple(sorted(values, key=spectrum_key)), path, 0.0)

    if A.exact and A.n == 2:
        (a, b), (c, d) = A.matrix
        trace = a + d
        disc = trace * trace - gaussian(4) * (a * d - b * c)
        root = gaussian_sqrt(disc)
        half = gaussian(Fraction(1, 2))
        if root is not None:
            values = ((trace + root) * half, (trace - root) * half)
            return EigenSolution(tuple(sorted(values, key=spectrum_key)), EXACT_PATH, 0.0)
        trace_s, disc_s = QQ_I.to_sympy(trace), QQ_I.to_sympy(disc)
        values = tuple(canonical_algebraic((trace_s + sign * sympy.sqrt(disc_s)) / 2) for sign in (1, -1))
        logger.debug(f"判別式が平方でないため代数的な固有値を使います: {values}")
        return EigenSolution(tuple(sorted(values, key=spectrum_key)), ALGEBRAIC_PATH, 0.0)

    if A.exact:
        logger.info(f"n={A.n} の非三角行列のため固有値は数値で計算します")
    roots, residual = _numeric_roots(A.to_numpy(), cluster_tolerance)
    if residual > 1e-8:
        raise EigenvalueError("固有値の数値計算が収束しません", residual)
    return EigenSolution(tuple(sorted((complex(r) for r in roots), key=spectrum_key)), NUMERIC_PATH, residual)


def eigenvalues(A: LinearPart) -> Tuple[object, ...]:
    """
    線形部分の固有値 (重複度込み)

    Args:
        A (LinearPart): 線形部分

    Returns:
        Tuple: 固有値 (偏角の昇順、次に絶対値の昇順)
    """
    return eigen_solution(A).values


def _points(eigs: Sequence[object]) -> List[Tuple]:
    if eigen_path(eigs) == EXACT_PATH:
        return [(qq_to_fraction(v.x), qq_to_fraction(v.y)) for v in eigs]
    return [(z.real, z.imag) for z in (to_complex(v) for v in eigs)]


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Sequence[Tuple]) -> List[Tuple]:
    """
    monotone chain による凸包 (反時計回り、共線な点は除く)
    """
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: List[Tuple] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Tuple] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _segment_distance_squared(a, b):
    dx, dy = b[0] - a[0], b[1] - a[1]
    length = dx * dx + dy * dy
    t = -(a[0] * dx + a[1] * dy) / length
    t = min(max(t, 0), 1)
    px, py = a[0] + t * dx, a[1] + t * dy
    return px * px + py * py


def hull_distance_squared(eigs: Sequence[object]):
    """
    0 から固有値の凸包までの距離の 2 乗。厳密な経路では Fraction を返す
    """
    hull = convex_hull(_points(eigs))
    origin = (0, 0)
    if len(hull) == 1:
        x, y = hull[0]
        return x * x + y * y
    if len(hull) >= 3 and all(_cross(hull[k], hull[(k + 1) % len(hull)], origin) >= 0 for k in range(len(hull))):
        return 0
    edges = [(hull[0], hull[1])] if len(hull) == 2 else \
        [(hull[k], hull[(k + 1) % len(hull)]) for k in range(len(hull))]
    return min(_segment_distance_squared(a, b) for a, b in edges)


def poincare_constant(eigs) -> Tuple[bool, Union[Fraction, float], Union[Fraction, float]]:
    """
    Poincaré 判定と定数 c, c^2

    Args:
        eigs: 固有値の列

    Returns:
        Tuple[bool, c, c^2]: c は有理数なら Fraction、そうでなければ float
    """
    eigs = as_eigenvalues(eigs)
    c_squared = hull_distance_squared(eigs)
    if eigen_path(eigs) == EXACT_PATH:
        c_squared = Fraction(c_squared)
        if c_squared == 0:
            return False, Fraction(0), Fraction(0)
        root = rational_sqrt(c_squared)
        return True, (root if root is not None else math.sqrt(c_squared)), c_squared
    c_squared = float(c_squared)
    c = math.sqrt(c_squared)
    if c <= HULL_TOLERANCE:
        return False, 0.0, 0.0
    return True, c, c_squared


def poincare_check(eigs) -> Tuple[bool, Union[Fraction, float]]:
    """
    0 が固有値の凸包の外にあるかを判定する

    Args:
        eigs: 固有値の列

    Returns:
        Tuple[bool, c]: (Poincaré 型かどうか, 0 から凸包までの距離)
    """
    poincare, c, _ = poincare_constant(eigs)
    return poincare, c


def algebraic_is_zero(expr) -> bool:
    decided = sympy.simplify(expr).equals(0)
    if decided is None:
        return abs(complex(sympy.N(expr, 50))) < 1e-40
    return bool(decided)


def same_ray(a, b, tolerance: Optional[float] = None) -> bool:
    """
    2 つの固有値が原点から出る同じ実半直線上にあるか

    Im(a·conj(b)) = 0 かつ Re(a·conj(b)) > 0 で判定する。

    Args:
        a: 固有値
        b: 固有値 (a と同じ表現)
        tolerance (Optional[float]): 数値経路での正規化外積の許容誤差

    Returns:
        bool: 同じ半直線上なら True
    """
    if QQ_I.of_type(a) and QQ_I.of_type(b):
        product = a * QQ_I(b.x, -b.y)
        return not product.y and qq_to_fraction(product.x) > 0
    if isinstance(a, sympy.Basic) or isinstance(b, sympy.Basic):
        product = sympy.expand(sympy.sympify(a) * sympy.conjugate(sympy.sympify(b)))
        return algebraic_is_zero(sympy.im(product)) and bool(sympy.re(product) > 0)
    if tolerance is None:
        tolerance = get_config().get_ray_tolerance()
    za, zb = to_complex(a), to_complex(b)
    product = za * zb.conjugate()
    size = abs(za) * abs(zb)
    return abs(product.imag) <= tolerance * size and product.real > 0


def ray_configuration(eigs, tolerance: Optional[float] = None) -> RayConfiguration:
    """
    固有値を同じ実半直線ごとにまとめ、偏角の昇順に並べる

    Args:
        eigs: 固有値の列 (番号はこの列の順、0 始まり)
        tolerance (Optional[float]): 数値経路での許容誤差

    Returns:
        RayConfiguration: 半直線配置

    Raises:
        NotPoincareError: Poincaré 型でない場合
    """
    eigs = as_eigenvalues(eigs)
    poincare, _ = poincare_check(eigs)
    if not poincare:
        raise NotPoincareError("Poincaré 型でないため半直線配置は定義されません")

    parts: List[List[int]] = []
    for index, value in enumerate(eigs):
        for part in parts:
            if same_ray(eigs[part[0]], value, tolerance):
                part.append(index)
                break
        else:
            parts.append([index])

    keyed = sorted(parts, key=lambda part: argument(eigs[part[0]]))
    ordered = tuple(tuple(sorted(part, key=lambda k: (abs(to_complex(eigs[k])), k))) for part in keyed)
    return RayConfiguration(ordered, tuple(argument(eigs[part[0]]) for part in ordered))


def ray_config_equivalent(r1: RayConfiguration, r2: RayConfiguration) -> bool:
    """
    2 つの半直線配置が同値か (大きさの列が一致するか、一方を逆順にして一致する)
    """
    return r1.sizes == r2.sizes or r1.sizes == tuple(reversed(r2.sizes))


def spectrum(germ: GermPoly) -> Spectrum:
    """
    germ のスペクトル (固有値・Poincaré 判定・c・Jordan 構造)

    Args:
        germ (GermPoly): germ

    Returns:
        Spectrum: スペクトル
    """
    A = linear_part(germ)
    solution = eigen_solution(A)
    poincare, c, c_squared = poincare_constant(solution.values)
    if A.is_jordan():
        flags = A.superdiagonal_flags()
    else:
        from .normal_form import jordanize
        J, _ = jordanize(A)
        flags = J.superdiagonal_flags()
    logger.info(f"スペクトル: 経路={solution.path}, Poincaré={poincare}, c={float(c):.6g}")
    return Spectrum(solution.values, poincare, c, c_squared, flags, solution.path, solution.residual)
