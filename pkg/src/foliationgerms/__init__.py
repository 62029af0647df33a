"""
Poincaré 型の正則葉層 germ の位相的分類と、球面上の交差葉層の不変量を調べるツール
"""
