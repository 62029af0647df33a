"""
Poincaré–Dulac 正規形

次数 k = 2..N ごとにホモロジー方程式を解き、非共鳴な単項式を座標変換で消去する。
線形部分が Jordan 型の場合は、対角部分 Λ と冪零部分 N に分けて
h = Σ_j (-Λ^{-1} L_N)^j Λ^{-1} g_nr で解く (L_N h = Dh·(N w) - N h)。
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
import sympy
from scipy.integrate import solve_ivp
from scipy.linalg import null_space
from sympy import QQ_I

from .config import get_config
from .errors import DimensionError, JordanStructureError, NearResonanceError, NotPoincareError
from .germ import ComplexScalar, GermPoly, qq_to_fraction, scale_germ, swap_coordinates
from .polynomial import (EXACT, NUMERIC, VectorField, compose, field_to_germ, germ_to_field, homogeneous_part,
                         identity_map, jacobian_apply, linear_map, poly_add_into, truncate, unit, with_linear_part)
from .resonance import ceil_resonance_bound, is_resonant
from .spectral import (ALGEBRAIC_PATH, EXACT_PATH, LinearPart, algebraic_is_zero, canonical_algebraic,
                       eigen_solution, linear_part, spectrum, spectrum_key, to_complex)

logger = logging.getLogger(__name__)

# 数値の Jordan 変換行列の条件数の上限
CONDITION_LIMIT = 1e8


@dataclass(frozen=True)
class CoordChange:
    """
    座標変換 z = H(w) (w: 正規形の座標、z: 元の座標)

    Attributes:
        forward (GermPoly): H の各成分を項のリストとして保持したもの
        inverse (GermPoly): 次数 degree までの逆写像 w = H^{-1}(z)
        degree (int): 打ち切り次数 N
    """
    forward: GermPoly
    inverse: GermPoly
    degree: int


@dataclass(frozen=True)
class NormalFormResult:
    """
    正規化の結果

    Attributes:
        normal (GermPoly): 正規形 (線形部分は Jordan 型、非線形項は共鳴な単項式のみ)
        change (CoordChange): 座標変換
        resonant_support (Tuple[Tuple[int, Tuple[int, ...]], ...]): 正規形に実際に現れる共鳴項 (成分は 0 始まり)
        eigenvalues (Tuple): 正規形の座標順の固有値 (判定に使う表現)
        path (str): 係数の計算経路 ('exact' / 'numeric')
    """
    normal: GermPoly
    change: CoordChange
    resonant_support: Tuple[Tuple[int, Tuple[int, ...]], ...]
    eigenvalues: Tuple[object, ...]
    path: str

    @property
    def degree(self) -> int:
        return self.change.degree


def _identity_rows(n: int, exact: bool):
    one, zero = (EXACT.one, EXACT.zero) if exact else (1 + 0j, 0j)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def _sympy_to_gaussian(value):
    return QQ_I.from_sympy(sympy.expand(value))


def _exact_jordanize(A: LinearPart) -> Tuple[LinearPart, LinearPart]:
    P, J = A.to_sympy().jordan_form()
    n = A.n
    blocks: List[Tuple[int, int]] = []
    start = 0
    for i in range(n):
        if i == n - 1 or J[i, i + 1] == 0:
            blocks.append((start, i + 1))
            start = i + 1
    blocks.sort(key=lambda b: spectrum_key(_sympy_to_gaussian(J[b[0], b[0]])))
    order = [k for a, b in blocks for k in range(a, b)]
    P = P.extract(list(range(n)), order)
    J = J.extract(order, order)
    to_rows = lambda M: tuple(tuple(_sympy_to_gaussian(M[i, j]) for j in range(n)) for i in range(n))
    return LinearPart(to_rows(J), True), LinearPart(to_rows(P), True)


def _rank_deficiency(B: np.ndarray, tolerance: float) -> Tuple[int, np.ndarray]:
    _, s, vh = np.linalg.svd(B)
    threshold = tolerance * max(1.0, s[0])
    count = int(np.sum(s <= threshold))
    return count, vh.conj().T


def _numeric_jordanize(A: LinearPart, cluster_tolerance: float) -> Tuple[LinearPart, LinearPart]:
    M = A.to_numpy()
    n = A.n
    values = eigen_solution(A).values
    distinct: List[Tuple[complex, int]] = []
    for value in (to_complex(v) for v in values):
        for k, (mu, count) in enumerate(distinct):
            if abs(value - mu) <= cluster_tolerance * (1 + abs(mu)):
                distinct[k] = (mu, count + 1)
                break
        else:
            distinct.append((value, 1))

    columns: List[np.ndarray] = []
    diagonal: List[complex] = []
    superdiagonal: List[complex] = []
    for mu, multiplicity in distinct:
        B = M - mu * np.eye(n)
        if multiplicity == 1:
            _, vectors = _rank_deficiency(B, cluster_tolerance)
            columns.append(vectors[:, -1])
            diagonal.append(mu)
            superdiagonal.append(0j)
            continue
        geometric, vectors = _rank_deficiency(B, np.sqrt(cluster_tolerance))
        if geometric == multiplicity:
            columns.extend(vectors[:, n - multiplicity:].T)
            diagonal.extend([mu] * multiplicity)
            superdiagonal.extend([0j] * multiplicity)
        elif geometric == 1:
            top = null_space(np.linalg.matrix_power(B, multiplicity), rcond=cluster_tolerance)
            lower = null_space(np.linalg.matrix_power(B, multiplicity - 1), rcond=cluster_tolerance)
            if top.shape[1] != multiplicity or lower.shape[1] != multiplicity - 1:
                raise JordanStructureError("Jordan 鎖の零空間の次元が合いません", float('inf'))
            projected = top - lower @ (lower.conj().T @ top)
            v = projected[:, int(np.argmax(np.linalg.norm(projected, axis=0)))]
            v = v / np.linalg.norm(v)
            chain = [v]
            for _ in range(multiplicity - 1):
                chain.append(B @ chain[-1])
            columns.extend(reversed(chain))
            diagonal.extend([mu] * multiplicity)
            superdiagonal.extend([1 + 0j] * (multiplicity - 1) + [0j])
        else:
            raise JordanStructureError(
                f"固有値 {mu:.6g} の Jordan 構造を数値的に決められません (幾何的重複度 {geometric}, 代数的重複度 {multiplicity})",
                float('inf'))

    P = np.column_stack(columns)
    condition = float(np.linalg.cond(P))
    if condition > CONDITION_LIMIT:
        raw, vectors = np.linalg.eig(M)
        gaps = [abs(raw[i] - raw[j]) for i in range(n) for j in range(i + 1, n)]
        if gaps and min(gaps) > cluster_tolerance * (1 + max(abs(raw))):
            logger.warning(f"Jordan 変換の条件数が大きいため対角化に切り替えます (条件数 {condition:.3e})")
            order = sorted(range(n), key=lambda k: spectrum_key(complex(raw[k])))
            P = vectors[:, order]
            diagonal = [complex(raw[k]) for k in order]
            superdiagonal = [0j] * n
        else:
            raise JordanStructureError("Jordan 変換行列の条件が悪すぎます", condition)

    J = np.diag(np.array(diagonal, dtype=complex)) + np.diag(np.array(superdiagonal[:-1], dtype=complex), 1)
    rows = lambda X: tuple(tuple(complex(v) for v in row) for row in X)
    return LinearPart(rows(J), False), LinearPart(rows(P), False)


def jordanize(A: LinearPart, cluster_tolerance: Optional[float] = None) -> Tuple[LinearPart, LinearPart]:
    """
    線形部分を Jordan 標準形に変換する (P^{-1} A P = J)

    すでに (スケールされた) Jordan 型の場合は (A, I) をそのまま返し、座標の順序も変えない。
    それ以外の場合、固有値はスペクトルと同じ順 (偏角、次に絶対値) に並ぶ。

    Args:
        A (LinearPart): 線形部分
        cluster_tolerance (Optional[float]): 数値固有値を重根とみなす相対許容誤差

    Returns:
        Tuple[LinearPart, LinearPart]: (J, P)

    Raises:
        JordanStructureError: 数値的に Jordan 構造を決められない場合
    """
    if cluster_tolerance is None:
        cluster_tolerance = get_config().get_cluster_tolerance()
    if A.is_jordan(cluster_tolerance):
        return A, LinearPart(_identity_rows(A.n, A.exact), A.exact)
    if A.exact and eigen_solution(A).path == EXACT_PATH:
        return _exact_jordanize(A)
    if A.exact:
        logger.warning("固有値が Gaussian 有理数でないため Jordan 変換は数値で計算します")
    return _numeric_jordanize(A, cluster_tolerance)


def _field_matrix(M: LinearPart, field):
    return [[field.convert(v) if field is EXACT else to_complex(v) for v in row] for row in M.matrix]


def _inverse_rows(M: LinearPart, field):
    if field is EXACT:
        inverse = M.to_sympy().inv()
        return [[_sympy_to_gaussian(inverse[i, j]) for j in range(M.n)] for i in range(M.n)]
    return [[complex(v) for v in row] for row in np.linalg.inv(M.to_numpy())]


def _apply_matrix(matrix, polys: VectorField, field) -> VectorField:
    n = len(polys)
    result = []
    for i in range(n):
        acc: Dict = {}
        for j in range(n):
            if not field.is_zero(matrix[i][j]):
                poly_add_into(acc, polys[j], field, factor=matrix[i][j])
        result.append(acc)
    return result


def linear_change(germ: GermPoly, P: LinearPart) -> GermPoly:
    """
    線形座標変換 z = P w による germ の変換 g(w) = P^{-1} f(P w)

    Args:
        germ (GermPoly): germ
        P (LinearPart): 可逆行列

    Returns:
        GermPoly: 変換後の germ
    """
    if P.n != germ.dimension:
        raise DimensionError(f"行列の次元 {P.n} が germ の次元 {germ.dimension} と一致しません")
    field = EXACT if germ.is_exact and P.exact else NUMERIC
    f = germ_to_field(germ, field)
    moved = compose(f, linear_map(_field_matrix(P, field), field), field, germ.degree)
    return field_to_germ(_apply_matrix(_inverse_rows(P, field), moved, field), field)


def _decision_eigenvalues(J: LinearPart, spec) -> Tuple[object, ...]:
    diagonal = J.diagonal()
    if J.exact or spec.path != ALGEBRAIC_PATH:
        return diagonal
    # 数値の対角成分を、最も近い代数的な固有値に対応させる
    return tuple(min(spec.eigenvalues, key=lambda v: abs(to_complex(v) - complex(d))) for d in diagonal)


class _Homological:
    """
    次数ごとのホモロジー方程式の解法
    """

    def __init__(self, eigs, field_eigs, nilpotent, field, near_resonance: float):
        self.eigs = eigs
        self.field_eigs = field_eigs
        self.nilpotent = nilpotent
        self.field = field
        self.near_resonance = near_resonance
        self.n = len(field_eigs)
        self._resonant: Dict = {}

    def resonant(self, target: int, exps) -> bool:
        key = (target, exps)
        if key not in self._resonant:
            self._resonant[key] = is_resonant(self.eigs, target, exps)
        return self._resonant[key]

    def split(self, part: VectorField) -> Tuple[VectorField, VectorField]:
        non_resonant, resonant = [], []
        for i, poly in enumerate(part):
            non_resonant.append({e: c for e, c in poly.items() if not self.resonant(i, e)})
            resonant.append({e: c for e, c in poly.items() if self.resonant(i, e)})
        return non_resonant, resonant

    def divide(self, part: VectorField) -> VectorField:
        field = self.field
        result = []
        for i, poly in enumerate(part):
            divided = {}
            for exps, coeff in poly.items():
                if self.resonant(i, exps):
                    continue
                margin = -self.field_eigs[i]
                for j, e in enumerate(exps):
                    if e:
                        margin = margin + field.from_int(e) * self.field_eigs[j]
                if field is NUMERIC and abs(margin) < self.near_resonance:
                    raise NearResonanceError(abs(margin), i, exps)
                divided[exps] = coeff / margin
            result.append(divided)
        return result

    def nilpotent_operator(self, h: VectorField, max_degree: int) -> VectorField:
        field = self.field
        n = self.n
        nw = [{unit(n, i + 1): self.nilpotent[i]} if i + 1 < n and not field.is_zero(self.nilpotent[i]) else {}
              for i in range(n)]
        if not any(nw):
            return [{} for _ in range(n)]
        result = jacobian_apply(h, nw, field, max_degree)
        minus_one = field.from_int(-1)
        for i in range(n - 1):
            if not field.is_zero(self.nilpotent[i]):
                poly_add_into(result[i], h[i + 1], field, factor=minus_one * self.nilpotent[i])
        return result

    def solve(self, non_resonant: VectorField, k: int) -> VectorField:
        term = self.divide(non_resonant)
        h = [dict(p) for p in term]
        minus_one = self.field.from_int(-1)
        for _ in range(k * self.n + self.n + 1):
            term = self.divide(self.nilpotent_operator(term, k))
            if not any(term):
                break
            for i in range(self.n):
                poly_add_into(h[i], term[i], self.field, factor=minus_one)
            term = [{e: minus_one * c for e, c in p.items()} for p in term]
        return h


def _inverse_map(forward: VectorField, P_inverse, field, max_degree: int) -> VectorField:
    n = len(forward)
    linear = linear_map(P_inverse, field)
    # φ = P^{-1} H - id (2 次以上の部分)
    phi = [{e: c for e, c in poly.items() if sum(e) >= 2} for poly in _apply_matrix(P_inverse, forward, field)]
    W = [dict(p) for p in linear]
    minus_one = field.from_int(-1)
    for _ in range(max_degree):
        correction = compose(phi, W, field, max_degree)
        W = [poly_add_into(dict(linear[i]), correction[i], field, factor=minus_one) for i in range(n)]
    return W


def poincare_dulac(germ: GermPoly, degree: Optional[int] = None) -> NormalFormResult:
    """
    Poincaré–Dulac 正規形を計算する

    Args:
        germ (GermPoly): Poincaré 型の germ
        degree (Optional[int]): 打ち切り次数 N。省略時は max(⌈max|λ|/c⌉, 2)

    Returns:
        NormalFormResult: 正規形・座標変換・共鳴項

    Raises:
        NotPoincareError: Poincaré 型でない場合
        NearResonanceError: 数値経路で分母が小さすぎる場合
    """
    spec = spectrum(germ)
    if not spec.poincare:
        raise NotPoincareError("Poincaré 型でないため正規形を計算できません")
    config = get_config()
    n = germ.dimension

    A = linear_part(germ)
    J, P = jordanize(A)
    field = EXACT if germ.is_exact and J.exact and P.exact else NUMERIC
    if germ.is_exact and field is NUMERIC:
        logger.warning("厳密な係数ですが Jordan 変換が厳密でないため正規形は数値で計算します")

    eigs = _decision_eigenvalues(J, spec)
    N = degree if degree is not None else max(ceil_resonance_bound(eigs), 2)
    if N < 2:
        raise ValueError(f"打ち切り次数は 2 以上である必要があります: {N}")
    if germ.degree > N:
        logger.info(f"次数 {N} を超える項は打ち切ります (germ の次数 {germ.degree})")

    J_field = _field_matrix(J, field)
    P_field = _field_matrix(P, field)
    field_eigs = [J_field[i][i] for i in range(n)]
    nilpotent = [J_field[i][i + 1] for i in range(n - 1)]
    solver = _Homological(eigs, field_eigs, nilpotent, field, config.get_near_resonance())

    f = [truncate(p, N) for p in germ_to_field(germ, field)]
    g = _apply_matrix(_inverse_rows(P, field), compose(f, linear_map(P_field, field), field, N), field)
    g = with_linear_part(g, J_field, field)
    H = linear_map(P_field, field)
    minus_one = field.from_int(-1)
    tolerance = config.get_coefficient_tolerance()

    for k in range(2, N + 1):
        part = [homogeneous_part(p, k) for p in g]
        non_resonant, _ = solver.split(part)
        if not any(non_resonant):
            continue
        h = solver.solve(non_resonant, k)
        shift = identity_map(n, field)
        for i in range(n):
            poly_add_into(shift[i], h[i], field)
        v = compose(g, shift, field, N)
        new = [dict(p) for p in v]
        for _ in range(N - k + 2):
            correction = jacobian_apply(h, new, field, N)
            new = [poly_add_into(dict(v[i]), correction[i], field, factor=minus_one) for i in range(n)]
        leftover = [(i, e) for i in range(n) for e in new[i] if sum(e) == k and not solver.resonant(i, e)]
        residue = max((abs(field.to_complex(new[i][e])) for i, e in leftover), default=0.0)
        if residue > tolerance:
            logger.warning(f"次数 {k}: ホモロジー方程式を解いた後に非共鳴項が残っています "
                           f"(最大 {residue:.3e}, 許容値 {tolerance:.1e})")
        elif leftover:
            logger.debug(f"次数 {k}: 丸め誤差の非共鳴項 {len(leftover)} 個を捨てます (最大 {residue:.3e})")
        for i, exps in leftover:
            del new[i][exps]
        g = new
        H = compose(H, shift, field, N)
        logger.debug(f"次数 {k}: 非共鳴項 {sum(len(p) for p in non_resonant)} 個を消去しました")

    inverse = _inverse_map(H, _inverse_rows(P, field), field, N)
    normal = field_to_germ(g, field)
    support = tuple(sorted(
        [(i, exps) for i, poly in enumerate(g) for exps in poly if sum(exps) >= 2]
        + [(i, unit(n, j)) for i in range(n) for j in range(n)
           if i != j and not field.is_zero(g[i].get(unit(n, j), field.zero))]))
    change = CoordChange(field_to_germ(H, field), field_to_germ(inverse, field), N)
    logger.info(f"正規形を計算しました: 経路={field.name}, 次数={N}, 共鳴項={len(support)}")
    return NormalFormResult(normal, change, support, tuple(eigs), field.name)


def apply_change(change: CoordChange, w) -> np.ndarray:
    """正規形の座標 w を元の座標 z = H(w) に写す"""
    return change.forward.evaluate(np.asarray(w, dtype=complex))


def apply_inverse(change: CoordChange, z) -> np.ndarray:
    """元の座標 z を正規形の座標 w = H^{-1}(z) に写す (次数 N まで)"""
    return change.inverse.evaluate(np.asarray(z, dtype=complex))


def flow_conjugacy_defect(germ: GermPoly, result: NormalFormResult, w0, t_end: float = 1.0,
                          samples: int = 21) -> float:
    """
    元の germ と正規形の複素フローを比較する

    正規形の解 w(t) を H で写した点と、H(w0) から出発した元の germ の解 z(t) の差の最大値を返す。

    Args:
        germ (GermPoly): 元の germ
        result (NormalFormResult): poincare_dulac の結果
        w0: 正規形の座標での初期点
        t_end (float): 積分の終了時刻
        samples (int): 比較する時刻の数

    Returns:
        float: max_t |H(w(t)) - z(t)|
    """
    n = germ.dimension
    w0 = np.asarray(w0, dtype=complex)
    times = np.linspace(0.0, t_end, samples)

    def integrate(target: GermPoly, start: np.ndarray) -> np.ndarray:
        rhs = lambda t, z: target.evaluate(z)
        solution = solve_ivp(rhs, (0.0, t_end), start, t_eval=times, rtol=1e-12, atol=1e-14, method='DOP853')
        return solution.y.T

    normal_path = integrate(result.normal, w0)
    original_path = integrate(germ, apply_change(result.change, w0))
    mapped = np.array([apply_change(result.change, w) for w in normal_path])
    return float(np.max(np.linalg.norm(mapped - original_path, axis=1)))


def normalize_superdiagonal(germ: GermPoly, c=None) -> GermPoly:
    """
    Jordan 型の優対角成分が c/(2n) になるように座標 z_i → ε_i z_i をスケールする

    Args:
        germ (GermPoly): 正規形の germ (線形部分は Jordan 型)
        c: Poincaré 定数。省略時はスペクトルから計算する

    Returns:
        GermPoly: 正規化した germ
    """
    n = germ.dimension
    A = linear_part(germ)
    if not A.is_jordan():
        raise ValueError("線形部分が Jordan 型ではありません")
    if c is None:
        c = spectrum(germ).c
    exact = germ.is_exact and isinstance(c, Fraction)
    if germ.is_exact and not exact:
        logger.warning("c が無理数のため優対角成分の正規化は数値で行います")
    field = EXACT if exact else NUMERIC
    target = field.convert(Fraction(c) / (2 * n)) if exact else complex(float(c) / (2 * n))

    epsilon = [field.one] * n
    for k in range(n - 2, -1, -1):
        entry = A.matrix[k][k + 1]
        if A.is_zero_entry(k, k + 1):
            epsilon[k] = field.one
        else:
            epsilon[k] = epsilon[k + 1] * field.convert(entry) / target

    polys = germ_to_field(germ, field)
    rescaled = []
    for i, poly in enumerate(polys):
        scaled = {}
        for exps, coeff in poly.items():
            factor = field.one
            for j, e in enumerate(exps):
                for _ in range(e):
                    factor = factor * epsilon[j]
            scaled[exps] = coeff * factor / epsilon[i]
        rescaled.append(scaled)
    return field_to_germ(rescaled, field)


@dataclass(frozen=True)
class CanonicalForm2D:
    """
    2 次元の標準形

    Attributes:
        kind (int): 型 1 (λ ∉ R), 2 (λ ∈ R, 共鳴項なし), 3 ((m x + y^m)∂/∂x + y∂/∂y), 4 (Jordan 型)
        parameter: 型 1, 2 では λ (判定に使う表現)、型 3, 4 では m
        germ (GermPoly): 標準形の germ
        swapped (bool): 座標を入れ替えた場合に True
        original_coefficient (Optional[ComplexScalar]): 型 3 でスケール前の y^m の係数
        path (str): 係数の計算経路
    """
    kind: int
    parameter: object
    germ: GermPoly
    swapped: bool = False
    original_coefficient: Optional[ComplexScalar] = None
    path: str = EXACT_PATH


def _ratio(a, b):
    if QQ_I.of_type(a) and QQ_I.of_type(b):
        return a / b
    if isinstance(a, sympy.Basic) or isinstance(b, sympy.Basic):
        return canonical_algebraic(sympy.sympify(a) / sympy.sympify(b))
    return complex(a) / complex(b)


def is_real_value(value, tolerance: Optional[float] = None) -> bool:
    """値が実数か (厳密・代数的・数値の各経路で判定する)"""
    if QQ_I.of_type(value):
        return not value.y
    if isinstance(value, sympy.Basic):
        return algebraic_is_zero(sympy.im(value))
    if tolerance is None:
        tolerance = get_config().get_ray_tolerance()
    return abs(complex(value).imag) <= tolerance * abs(complex(value))


def _scalar(value) -> ComplexScalar:
    if QQ_I.of_type(value):
        return ComplexScalar.coerce(value)
    return ComplexScalar.from_complex(to_complex(value))


def integer_value(value) -> Optional[int]:
    """値が (判定経路のもとで) 整数ならその整数を返す"""
    if QQ_I.of_type(value):
        if value.y:
            return None
        x = qq_to_fraction(value.x)
        return int(x) if x.denominator == 1 else None
    if isinstance(value, sympy.Basic):
        real = sympy.re(value)
        return int(real) if real.is_integer else None
    z = complex(value)
    nearest = round(z.real)
    if abs(z - nearest) <= get_config().get_resonance_tolerance() * (1 + abs(nearest)):
        return int(nearest)
    return None


def canonical_form_2d(germ: GermPoly) -> CanonicalForm2D:
    """
    2 次元の Poincaré 型 germ を標準形 (型 1〜4) に変換する

    Args:
        germ (GermPoly): n = 2 の Poincaré 型 germ

    Returns:
        CanonicalForm2D: 型・パラメータ・標準形の germ

    Raises:
        DimensionError: n != 2 の場合
        NotPoincareError: Poincaré 型でない場合
    """
    if germ.dimension != 2:
        raise DimensionError(f"2 次元の germ が必要です: n={germ.dimension}")
    result = poincare_dulac(germ)
    normal = result.normal
    lam1, lam2 = result.eigenvalues
    path = result.path

    if linear_part(normal).superdiagonal_flags()[0]:
        scaled = scale_germ(normal, _scalar(lam2).reciprocal())
        canonical = normalize_superdiagonal(scaled, Fraction(1) if scaled.is_exact else 1.0)
        logger.info("型 4 (Jordan 型) の標準形です")
        return CanonicalForm2D(4, 1, canonical, False, None, path)

    ratio = _ratio(lam1, lam2)
    if not is_real_value(ratio):
        canonical = scale_germ(normal, _scalar(lam2).reciprocal())
        logger.info(f"型 1 (λ ∉ R) の標準形です: λ={to_complex(ratio):.6g}")
        return CanonicalForm2D(1, ratio, canonical, False, None, path)

    swapped = to_complex(ratio).real < 1
    if swapped:
        normal = swap_coordinates(normal)
        ratio = _ratio(lam2, lam1)
        lam2 = lam1
    if not QQ_I.of_type(ratio) and not isinstance(ratio, sympy.Basic):
        ratio = complex(complex(ratio).real, 0.0)
    scaled = scale_germ(normal, _scalar(lam2).reciprocal())

    m = integer_value(ratio)
    if m is not None and m >= 2:
        coefficient = scaled.coefficient(1, (0, m))
        tolerance = get_config().get_coefficient_tolerance()
        nonzero = coefficient is not None and (
            not coefficient.is_zero() if coefficient.is_exact else abs(coefficient.value) > tolerance)
        if nonzero:
            inverse = coefficient.reciprocal()
            terms = []
            for term in scaled.terms:
                factor = ComplexScalar.from_fractions(1)
                for _ in range(term.exponents[0]):
                    factor = factor * coefficient
                if term.component == 1:
                    factor = factor * inverse
                terms.append((term.component, term.exponents, term.coeff * factor))
            canonical = GermPoly.from_terms(2, terms)
            logger.info(f"型 3 の標準形です: m={m}, 元の係数={coefficient.value:.6g}")
            return CanonicalForm2D(3, m, canonical, swapped, coefficient, path)

    logger.info(f"型 2 (λ ∈ R) の標準形です: λ={to_complex(ratio).real:.12g}")
    return CanonicalForm2D(2, ratio, scaled, swapped, None, path)
