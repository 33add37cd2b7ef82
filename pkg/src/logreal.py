from __future__ import annotations

import functools
import logging
import sys
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Literal, Union

import mpmath
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from .config import WORKING_DPS
from .errors import DomainError

logger = logging.getLogger("symstoch.logreal")

NEG_INF = mpmath.mpf("-inf")
_LOG_FLOAT_MAX = mpmath.log(sys.float_info.max)

Number = Union[int, float, Fraction, mpmath.mpf]


def to_mpf(value: Number) -> mpmath.mpf:
    """Convert an exact or floating value to an mpf at the working precision."""
    with mpmath.workdps(WORKING_DPS):
        if isinstance(value, Fraction):
            return mpmath.mpf(value.numerator) / value.denominator
        return mpmath.mpf(value)


@functools.total_ordering
class LogReal(BaseModel):
    """
    A real number held as a sign and the natural log of its magnitude.

    Products and quotients add and subtract logs, so values such as
    (1+lambda)**C(N,2) never leave the representable range. Conversion to a
    plain float happens only on request.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sign: Literal[-1, 0, 1]
    log_magnitude: mpmath.mpf

    @field_validator("log_magnitude", mode="before")
    @classmethod
    def _coerce_log(cls, value):
        return to_mpf(value)

    @model_validator(mode="after")
    def _zero_iff_neg_inf(self) -> "LogReal":
        if (self.sign == 0) != (self.log_magnitude == NEG_INF):
            raise ValueError("sign must be 0 exactly when log_magnitude is -inf")
        return self

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(sign=0, log_magnitude=NEG_INF)

    @classmethod
    def from_log(cls, log_magnitude: Number, sign: int = 1) -> "LogReal":
        return cls(sign=sign, log_magnitude=log_magnitude)

    @classmethod
    def from_value(cls, value: Union[Number, "LogReal"]) -> "LogReal":
        """Build from an int, float, Fraction or mpf (LogReal passes through)."""
        if isinstance(value, LogReal):
            return value
        with mpmath.workdps(WORKING_DPS):
            v = to_mpf(value)
            if v == 0:
                return cls.zero()
            return cls(sign=1 if v > 0 else -1, log_magnitude=mpmath.log(abs(v)))

    def __mul__(self, other: Union[Number, "LogReal"]) -> "LogReal":
        other = LogReal.from_value(other)
        if self.sign == 0 or other.sign == 0:
            return LogReal.zero()
        with mpmath.workdps(WORKING_DPS):
            return LogReal(
                sign=self.sign * other.sign,
                log_magnitude=self.log_magnitude + other.log_magnitude,
            )

    __rmul__ = __mul__

    def __truediv__(self, other: Union[Number, "LogReal"]) -> "LogReal":
        other = LogReal.from_value(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogReal")
        if self.sign == 0:
            return LogReal.zero()
        with mpmath.workdps(WORKING_DPS):
            return LogReal(
                sign=self.sign * other.sign,
                log_magnitude=self.log_magnitude - other.log_magnitude,
            )

    def __rtruediv__(self, other: Number) -> "LogReal":
        return LogReal.from_value(other) / self

    def __pow__(self, exponent: Number) -> "LogReal":
        if self.sign < 0:
            raise DomainError("real powers of a negative LogReal are undefined")
        if self.sign == 0:
            if exponent > 0:
                return LogReal.zero()
            raise ZeroDivisionError("nonpositive power of zero")
        with mpmath.workdps(WORKING_DPS):
            return LogReal(sign=1, log_magnitude=self.log_magnitude * to_mpf(exponent))

    def __neg__(self) -> "LogReal":
        return LogReal(sign=-self.sign, log_magnitude=self.log_magnitude)

    def __lt__(self, other: Union[Number, "LogReal"]) -> bool:
        other = LogReal.from_value(other)
        if self.sign != other.sign:
            return self.sign < other.sign
        if self.sign == 0:
            return False
        if self.sign > 0:
            return self.log_magnitude < other.log_magnitude
        return self.log_magnitude > other.log_magnitude

    def log10(self) -> mpmath.mpf:
        with mpmath.workdps(WORKING_DPS):
            return self.log_magnitude / mpmath.log(10)

    def to_mpf(self) -> mpmath.mpf:
        if self.sign == 0:
            return mpmath.mpf(0)
        with mpmath.workdps(WORKING_DPS):
            return self.sign * mpmath.exp(self.log_magnitude)

    @property
    def fits_float(self) -> bool:
        return self.sign == 0 or self.log_magnitude <= _LOG_FLOAT_MAX

    def to_float(self) -> float:
        """Convert to float; values beyond the float range become +/-inf."""
        if not self.fits_float:
            logger.warning("LogReal with log magnitude %s overflows float", self.log_magnitude)
            return self.sign * float("inf")
        return float(self.to_mpf())

    def to_scientific(self, digits: int = 3) -> str:
        return format_scientific(self, digits)


def format_scientific(value: Union[int, LogReal], digits: int = 3) -> str:
    """
    Round to `digits` significant figures (half-even) in the 5.42E7 notation.

    Integers are rounded exactly; LogReal values go through their base-10 log
    at the working precision.
    """
    with localcontext() as ctx:
        ctx.prec = max(60, WORKING_DPS + 10)
        if isinstance(value, LogReal):
            if value.sign == 0:
                dec = Decimal(0)
            else:
                with mpmath.workdps(WORKING_DPS):
                    log10 = value.log10()
                    exponent = int(mpmath.floor(log10))
                    mantissa = mpmath.power(10, log10 - exponent)
                    dec = Decimal(mpmath.nstr(mantissa, WORKING_DPS - 5)).scaleb(exponent)
                if value.sign < 0:
                    dec = -dec
        else:
            digits_needed = len(str(abs(int(value))))
            ctx.prec = max(ctx.prec, digits_needed + 5)
            dec = Decimal(int(value))

        if dec == 0:
            return f"{Decimal(0).quantize(Decimal(1).scaleb(-(digits - 1)))}E0"
        exponent = dec.adjusted()
        quantum = Decimal(1).scaleb(-(digits - 1))
        mantissa = dec.scaleb(-exponent).quantize(quantum, rounding=ROUND_HALF_EVEN)
        if abs(mantissa) >= 10:
            exponent += 1
            mantissa = (mantissa / 10).quantize(quantum, rounding=ROUND_HALF_EVEN)
        return f"{mantissa}E{exponent}"
