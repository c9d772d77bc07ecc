"""Thin wrappers around :mod:`scipy.fft` honouring the thread-count setting."""

import os

import scipy.fft as _sfft

THREADS_ENV = "FRACHEAT_THREADS"


def workers():
    """Number of FFT worker threads (``FRACHEAT_THREADS``, default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return n if n != 0 else 1


def fftn(a, axes=None):
    return _sfft.fftn(a, axes=axes, workers=workers())


def ifftn(a, axes=None):
    return _sfft.ifftn(a, axes=axes, workers=workers())


def rfft(a):
    return _sfft.rfft(a, workers=workers())


def irfft(a, n):
    return _sfft.irfft(a, n=n, workers=workers())


def fft(a, axis=-1):
    return _sfft.fft(a, axis=axis, workers=workers())


def ifft(a, axis=-1):
    return _sfft.ifft(a, axis=axis, workers=workers())
