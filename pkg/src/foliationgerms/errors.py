"""
パッケージ共通の例外クラス
"""
from typing import Optional, Tuple


class FoliationError(Exception):
    """
    このパッケージが送出する例外の基底クラス
    """


class GermFormatError(FoliationError):
    """
    germ ファイルの形式エラー

    Attributes:
        line (Optional[int]): エラー位置の行番号 (構文エラーの場合)
        column (Optional[int]): エラー位置の列番号 (構文エラーの場合)
    """

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            message = f"{message} (行 {line}, 列 {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DimensionError(FoliationError):
    """次元が演算の前提を満たさない"""


class NotPoincareError(FoliationError):
    """
    固有値の凸包が原点を含む (Poincaré 領域外)
    """


class EigenvalueError(FoliationError):
    """
    数値固有値計算が収束しない

    Attributes:
        residual (float): 特性多項式の残差
    """

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (残差 {residual:.3e})")
        self.residual = residual


class JordanStructureError(FoliationError):
    """
    数値的に Jordan 構造を決められない

    Attributes:
        condition (float): 変換行列の条件数の推定値
    """

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (条件数 {condition:.3e})")
        self.condition = condition


class NearResonanceError(FoliationError):
    """
    数値経路でホモロジー方程式の分母が小さすぎる

    Attributes:
        margin (float): |<m,λ> - λ_i|
        target (int): 成分の番号 (0 始まり)
        exponents (Tuple[int, ...]): 単項式の指数
    """

    def __init__(self, margin: float, target: int, exponents: Tuple[int, ...]):
        super().__init__(f"準共鳴のため消去できません: 成分 {target + 1}, 指数 {exponents}, 分母 {margin:.3e}")
        self.margin = margin
        self.target = target
        self.exponents = exponents


class RationalityUndecidedError(FoliationError):
    """
    数値経路で λ の有理性を判定できない

    Attributes:
        value (float): 判定対象の実数
        witness (Tuple[int, int]): 最良の連分数近似 (p, q)
        error (float): |λ - p/q| * q^2
    """

    def __init__(self, value: float, witness: Tuple[int, int], error: float):
        super().__init__(f"有理性を判定できません: λ={value!r}, 近似分数 {witness[0]}/{witness[1]}, q^2 誤差 {error:.3e}")
        self.value = value
        self.witness = witness
        self.error = error


class TangencyError(FoliationError):
    """
    葉が球面に接している (横断性が失われた)

    Attributes:
        margin (float): |<θ(z), z>|
    """

    def __init__(self, margin: float, point=None):
        super().__init__(f"葉が球面に接しています: |c| = {margin:.3e}")
        self.margin = margin
        self.point = point


class StepCollapseError(FoliationError):
    """積分のステップ幅が下限を下回った"""


class ProfileAmbiguousError(FoliationError):
    """トーラス半径プロファイルを分類できない"""


class NoApexError(FoliationError):
    """トレースに頂点 (|y| の唯一の極大) が無い"""


class HolonomyNoReturnError(FoliationError):
    """
    横断円板への第一回帰が得られない

    Attributes:
        drift_rate (float): 横断方向の座標の絶対値の単位時間あたりの相対変化
    """

    def __init__(self, message: str, drift_rate: float):
        super().__init__(f"{message} (ドリフト率 {drift_rate:.3e})")
        self.drift_rate = drift_rate


class InsufficientCrossingsError(FoliationError):
    """
    傾き推定に必要な交差回数が足りない

    Attributes:
        crossings (Tuple[int, int]): (C1 の交差回数, C2 の交差回数)
    """

    def __init__(self, crossings: Tuple[int, int], required: int):
        super().__init__(f"交差回数が不足しています: {crossings} (必要数 {required})")
        self.crossings = crossings
        self.required = required
