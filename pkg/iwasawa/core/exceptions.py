"""iwasawa のカスタム例外クラス."""


class IwasawaError(Exception):
    """計算処理時のエラー."""

    def __init__(self, message: str) -> None:
        """初期化.

        Args:
            message: エラーメッセージ

        """
        super().__init__(message)
        self.message = message


class ParseError(Exception):
    """入力（CLI引数・JSONファイル）解析時のエラー."""

    def __init__(self, message: str) -> None:
        """初期化.

        Args:
            message: エラーメッセージ

        """
        super().__init__(message)
        self.message = message


class InvalidParameterError(IwasawaError):
    """p, m, N, M, n, 指標などのパラメータ不正."""
    pass


class PrecisionError(IwasawaError):
    """精度台帳に関するエラーの基底クラス."""
    pass


class AllZeroAtPrecision(PrecisionError):
    """現在の精度で級数が0と区別できない（μが決まらない）."""
    pass


class TruncationTooSmall(PrecisionError):
    """打ち切り次数M未満に単元係数がない（λ ≥ M）."""
    pass


class PrecisionExhausted(PrecisionError):
    """有限性を保証できるだけの精度が残っていない."""
    pass


class ZeroAtPrecision(PrecisionError):
    """評価値が現在の精度で0と区別できない."""
    pass


class PrecisionBudgetExceeded(PrecisionError):
    """補間による桁落ちが精度Nを超える."""
    pass


class LevelTooSmall(PrecisionError):
    """Stickelberger構成のレベルが要求された打ち切り次数に足りない."""
    pass


class NotDistinguishedError(IwasawaError):
    """除数が特殊多項式（distinguished polynomial）でない."""
    pass


class NotInMaximalIdealError(IwasawaError):
    """代入点が極大イデアルに属さない."""
    pass


class NotFiniteError(IwasawaError):
    """有限でない群のオイラー標数を求めようとした."""
    pass


class NotTypeSError(IwasawaError):
    """指標がタイプSでない."""
    pass


class EmbeddingDenominatorError(IwasawaError):
    """分母がpで割り切れるためp進埋め込みできない."""
    pass


class NotSemisimpleError(IwasawaError):
    """複体がρで半単純でない."""
    pass


class InconsistentComplexError(IwasawaError):
    """d∘d ≠ 0 または β∘β ≠ 0（入力が複体になっていない）."""
    pass
