from typing import Sequence


def blade_label(mask: int) -> str:
    """Label a bitmask blade as e.g. 'e13'; the empty blade is '1'"""
    if mask == 0:
        return "1"
    digits = [str(i + 1) for i in range(mask.bit_length()) if mask >> i & 1]
    sep = "," if any(len(d) > 1 for d in digits) else ""
    return "e" + sep.join(digits)


def format_multivector(coeffs: Sequence[float], precision: int = 6) -> str:
    terms = []
    for mask, value in enumerate(coeffs):
        if value == 0:
            continue
        text = f"{abs(value):.{precision}g}"
        if mask:
            text = blade_label(mask) if text == "1" else f"{text}*{blade_label(mask)}"
        terms.append(("-" if value < 0 else "+", text))
    if not terms:
        return "0"
    sign, first = terms[0]
    out = ("-" if sign == "-" else "") + first
    for sign, text in terms[1:]:
        out += f" {sign} {text}"
    return out
