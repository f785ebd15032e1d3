"""例外クラスのテスト."""

import pytest

from iwasawa.core.exceptions import (
    AllZeroAtPrecision,
    InvalidParameterError,
    IwasawaError,
    NotSemisimpleError,
    ParseError,
    PrecisionError,
    ZeroAtPrecision,
)


class TestExceptions:
    """例外クラスのテスト."""

    def test_iwasawa_error_can_be_raised(self):
        """IwasawaErrorが発生させられる."""
        with pytest.raises(IwasawaError):
            raise IwasawaError("テストエラー")

    def test_parse_error_is_separate(self):
        """ParseErrorは計算エラーとは別系統."""
        assert not issubclass(ParseError, IwasawaError)
        with pytest.raises(ParseError):
            raise ParseError("パースエラー")

    def test_precision_errors_share_base(self):
        """精度関連のエラーはPrecisionErrorで捕捉できる."""
        for cls in (AllZeroAtPrecision, ZeroAtPrecision):
            with pytest.raises(PrecisionError):
                raise cls("精度不足")

    def test_errors_have_message(self):
        """例外にメッセージが含まれる."""
        message = "p は奇素数でなければなりません"
        try:
            raise InvalidParameterError(message)
        except IwasawaError as e:
            assert str(e) == message
            assert e.message == message

    def test_not_semisimple_is_iwasawa_error(self):
        """NotSemisimpleErrorはIwasawaErrorの派生."""
        assert issubclass(NotSemisimpleError, IwasawaError)
