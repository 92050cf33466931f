# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Covariance kernels and their composition.

:py:mod:`kremu.kernels` defines the kernel catalog shared by the three
regressors and a small text language to write kernels on the command line.

* Leaf kernels: `Linear`, `RBF`, `Matern12` (also ``exp``), `Matern32`,
  `Matern52`, `White`, `Bias`.
* Composition: `Sum` and `Product` nodes, also built with ``+`` and ``*``.
* `eval_kernel` - Evaluate k(x, x') for two input vectors.
* `kernel_matrix` - Assemble the covariance matrix of two input sets.
* `parse_kernel` / `print_kernel` - Kernel text language.

The stationary kernels use one isotropic lengthscale shared by all input
dimensions. With ``r = ||x - x'||``:

=========== ===============================================
Kernel      k(x, x')
=========== ===============================================
linear      ``var * <x, x'>``
rbf         ``var * exp(-r**2 / (2 ls**2))``
matern12    ``var * exp(-r / ls)``
matern32    ``var * (1 + sqrt(3) r / ls) exp(-sqrt(3) r / ls)``
matern52    ``var * (1 + sqrt(5) r / ls + 5 r**2 / (3 ls**2))``
            ``* exp(-sqrt(5) r / ls)``
white       ``var`` if x and x' are identical, else 0
bias        ``var``
=========== ===============================================

Kernel text grammar::

    expr  := term ('+' term)*
    term  := atom ('*' atom)*
    atom  := NAME '(' [kv (',' kv)*] ')' | '(' expr ')'
    kv    := ('ls' | 'var') '=' NUMBER

``*`` binds tighter than ``+`` and both are left associative. Omitted ``ls``
and ``var`` default to 1. Every kernel accepts ``ls``; linear, white and bias
check it and otherwise ignore it.
"""

import logging
import math
import re
from collections import namedtuple

import numpy

from .numerics import DimensionMismatch, as_matrix, as_vector

logger = logging.getLogger('kremu.kernels')


class KernelSyntaxError(ValueError):
    """Kernel text does not follow the grammar.

    Attributes:
        position (int): Character offset of the offending token.
        expected (str): Description of what the parser expected.
    """

    def __init__(self, position, expected, text=None):
        self.position = position
        self.expected = expected
        msg = 'kernel syntax error at position ' + str(position) \
            + ': expected ' + expected
        if text is not None:
            msg += '\n  ' + text + '\n  ' + ' ' * position + '^'
        super().__init__(msg)


class UnknownKernelName(ValueError):
    """The kernel name is not in the catalog."""


class InvalidHyperparameter(ValueError):
    """A hyperparameter is outside its allowed range."""


def _check_variance(var):
    var = float(var)
    if not (math.isfinite(var) and var >= 0):
        raise InvalidHyperparameter('variance must be finite and >= 0, got '
                                    + repr(var))
    return var


def _check_lengthscale(ls):
    ls = float(ls)
    if not (math.isfinite(ls) and ls > 0):
        raise InvalidHyperparameter('lengthscale must be finite and > 0, got '
                                    + repr(ls))
    return ls


class _Geometry(object):
    """Lazily computed pairwise quantities of two input sets."""

    def __init__(self, xs, xps):
        self.xs = xs
        self.xps = xps
        self._sqdist = None

    @property
    def shape(self):
        return (self.xs.shape[0], self.xps.shape[0])

    @property
    def sqdist(self):
        if self._sqdist is None:
            diff = self.xs[:, None, :] - self.xps[None, :, :]
            self._sqdist = numpy.sum(diff * diff, axis=2)
        return self._sqdist

    @property
    def dist(self):
        return numpy.sqrt(self.sqdist)

    @property
    def inner(self):
        return numpy.sum(self.xs[:, None, :] * self.xps[None, :, :], axis=2)

    @property
    def identical(self):
        return numpy.all(self.xs[:, None, :] == self.xps[None, :, :], axis=2)


class Kernel(object):
    """Base class of kernel expression nodes.

    Kernels are immutable. ``k1 + k2`` and ``k1 * k2`` build `Sum` and
    `Product` nodes, ``k(x, xp)`` evaluates `eval_kernel`.
    """

    def __add__(self, other):
        return Sum(self, other)

    def __mul__(self, other):
        return Product(self, other)

    def __call__(self, x, xp):
        return eval_kernel(self, x, xp)

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'Kernel(' + repr(print_kernel(self)) + ')'

    def leaves(self):
        """list[Kernel]: Leaf kernels from left to right."""
        return [self]

    def _evaluate(self, geometry):
        raise NotImplementedError


class _Leaf(Kernel):
    name = None
    stationary = False

    def __init__(self, var=1.0):
        self.variance = _check_variance(var)

    def _params(self):
        return (self.variance,)

    def __eq__(self, other):
        return type(self) is type(other) and self._params() == other._params()

    def __hash__(self):
        return hash((type(self).__name__,) + self._params())


class _Stationary(_Leaf):
    stationary = True

    def __init__(self, ls=1.0, var=1.0):
        super().__init__(var)
        self.lengthscale = _check_lengthscale(ls)

    def _params(self):
        return (self.lengthscale, self.variance)

    def _evaluate(self, geometry):
        return self.variance * self._profile(geometry)

    def _profile(self, geometry):
        raise NotImplementedError


class Linear(_Leaf):
    """Linear (dot product) kernel ``var * <x, x'>``."""

    name = 'linear'

    def _evaluate(self, geometry):
        return self.variance * geometry.inner


class Bias(_Leaf):
    """Constant kernel ``var``."""

    name = 'bias'

    def _evaluate(self, geometry):
        return numpy.full(geometry.shape, self.variance)


class White(_Leaf):
    """White noise kernel, ``var`` on identical inputs and 0 elsewhere.

    Identity is tested by exact coordinate equality, so the kernel only acts
    on the diagonal of training self-matrices.
    """

    name = 'white'

    def _evaluate(self, geometry):
        return self.variance * geometry.identical.astype(numpy.float64)


class RBF(_Stationary):
    """Radial basis function (squared exponential) kernel."""

    name = 'rbf'

    def _profile(self, geometry):
        return numpy.exp(-0.5 * geometry.sqdist / self.lengthscale**2)


class Matern12(_Stationary):
    """Matérn 1/2 (exponential) kernel."""

    name = 'matern12'

    def _profile(self, geometry):
        return numpy.exp(-geometry.dist / self.lengthscale)


Exponential = Matern12


class Matern32(_Stationary):
    """Matérn 3/2 kernel."""

    name = 'matern32'

    def _profile(self, geometry):
        s = math.sqrt(3.0) * geometry.dist / self.lengthscale
        return (1.0 + s) * numpy.exp(-s)


class Matern52(_Stationary):
    """Matérn 5/2 kernel."""

    name = 'matern52'

    def _profile(self, geometry):
        s = math.sqrt(5.0) * geometry.dist / self.lengthscale
        return (1.0 + s + s * s / 3.0) * numpy.exp(-s)


class _Node(Kernel):
    symbol = None

    def __init__(self, left, right):
        if not (isinstance(left, Kernel) and isinstance(right, Kernel)):
            raise TypeError('kernel nodes combine Kernel instances')
        self.left = left
        self.right = right

    def leaves(self):
        return self.left.leaves() + self.right.leaves()

    def __eq__(self, other):
        return (type(self) is type(other) and self.left == other.left
                and self.right == other.right)

    def __hash__(self):
        return hash((type(self).__name__, self.left, self.right))


class Sum(_Node):
    """Sum of two kernels."""

    symbol = '+'

    def _evaluate(self, geometry):
        return self.left._evaluate(geometry) + self.right._evaluate(geometry)


class Product(_Node):
    """Product of two kernels."""

    symbol = '*'

    def _evaluate(self, geometry):
        return self.left._evaluate(geometry) * self.right._evaluate(geometry)


CATALOG = {
    'linear': Linear,
    'rbf': RBF,
    'exp': Matern12,
    'matern12': Matern12,
    'matern32': Matern32,
    'matern52': Matern52,
    'white': White,
    'bias': Bias,
}

KernelMatrix = namedtuple('KernelMatrix', 'm symmetric')
KernelMatrix.__doc__ = """Kernel matrix of two input sets.

Attributes:
    m ((*n*, *m*) `numpy.ndarray`): Entry (i, j) is k(xs[i], xps[j]).
    symmetric (bool): True when built from a single input set.
"""


def eval_kernel(k, x, xp):
    """Evaluate the kernel on two input vectors.

    Args:
        k (`Kernel`): Kernel expression.
        x ((*d*,) array_like): First input.
        xp ((*d*,) array_like): Second input.

    Returns:
        float: k(x, xp).

    Raises:
        DimensionMismatch: *x* and *xp* differ in length.
    """
    x = as_vector(x, 'x')
    xp = as_vector(xp, 'xp')
    if x.shape != xp.shape:
        raise DimensionMismatch('kernel inputs have lengths ' + str(len(x))
                                + ' and ' + str(len(xp)))
    return float(k._evaluate(_Geometry(x[None, :], xp[None, :]))[0, 0])


def kernel_matrix(k, xs, xps=None):
    """Assemble the kernel matrix of two input sets.

    Args:
        k (`Kernel`): Kernel expression.
        xs ((*n*, *d*) array_like): Row inputs.
        xps ((*m*, *d*) array_like): Column inputs. When omitted (or the same
            object as *xs*) the self-matrix of *xs* is built.

    Returns:
        `KernelMatrix`: The matrix. Self-matrices are exactly symmetric.

    Raises:
        DimensionMismatch: *xs* and *xps* have different column counts.
    """
    symmetric = xps is None or xps is xs
    xs = as_matrix(xs, 'xs')
    if symmetric:
        xps = xs
    else:
        xps = as_matrix(xps, 'xps')
        if xs.shape[1] != xps.shape[1]:
            raise DimensionMismatch('kernel inputs have ' + str(xs.shape[1])
                                    + ' and ' + str(xps.shape[1])
                                    + ' columns')
        symmetric = numpy.array_equal(xs, xps)

    m = k._evaluate(_Geometry(xs, xps))
    if symmetric:
        # mirror the upper triangle so each pair is evaluated once
        m = numpy.triu(m) + numpy.triu(m, 1).T
    return KernelMatrix(m=numpy.ascontiguousarray(m), symmetric=symmetric)


def kernel_diagonal(k, xs):
    """Return k(x, x) for each row x of *xs*."""
    xs = as_matrix(xs, 'xs')
    return numpy.array([eval_kernel(k, row, row) for row in xs])


def retune(k, ls=None, var=None):
    """Copy a kernel template with new hyperparameters.

    Args:
        k (`Kernel`): Template.
        ls (float): Replaces the lengthscale of every stationary leaf.
        var (float): Replaces the variance of the leftmost leaf.

    Returns:
        `Kernel`: The new kernel.
    """
    first = k.leaves()[0]

    def rebuild(node):
        if isinstance(node, _Node):
            return type(node)(rebuild(node.left), rebuild(node.right))
        new_var = var if (var is not None and node is first) \
            else node.variance
        if node.stationary:
            new_ls = ls if ls is not None else node.lengthscale
            return type(node)(ls=new_ls, var=new_var)
        return type(node)(var=new_var)

    return rebuild(k)


_TOKEN = re.compile(r"""
    (?P<space>\s+)
  | (?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[()+*,=])
""", re.VERBOSE)

_Token = namedtuple('_Token', 'kind text position')


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            raise KernelSyntaxError(pos, 'a name, number or one of ()+*,=',
                                    text)
        kind = match.lastgroup
        if kind != 'space':
            value = match.group(kind)
            tokens.append(_Token(value if kind == 'punct' else kind, value,
                                 pos))
        pos = match.end()
    tokens.append(_Token('end', '', len(text)))
    return tokens


class _Parser(object):
    """Recursive descent parser of the kernel text language."""

    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    @property
    def current(self):
        return self.tokens[self.index]

    def error(self, expected):
        return KernelSyntaxError(self.current.position, expected, self.text)

    def expect(self, kind, expected=None):
        token = self.current
        if token.kind != kind:
            raise self.error(expected or repr(kind))
        self.index += 1
        return token

    def parse(self):
        if self.current.kind == 'end':
            raise self.error('a kernel expression')
        node = self.expr()
        if self.current.kind != 'end':
            raise self.error("'+', '*' or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.current.kind == '+':
            self.index += 1
            node = Sum(node, self.term())
        return node

    def term(self):
        node = self.atom()
        while self.current.kind == '*':
            self.index += 1
            node = Product(node, self.atom())
        return node

    def atom(self):
        token = self.current
        if token.kind == '(':
            self.index += 1
            node = self.expr()
            self.expect(')', "')'")
            return node
        if token.kind != 'name':
            raise self.error("a kernel name or '('")
        self.index += 1
        cls = CATALOG.get(token.text.lower())
        if cls is None:
            raise UnknownKernelName('unknown kernel ' + repr(token.text)
                                    + ' at position ' + str(token.position)
                                    + '; known kernels: '
                                    + ', '.join(sorted(CATALOG)))
        self.expect('(', "'('")
        params = {}
        if self.current.kind != ')':
            self.keyword(params)
            while self.current.kind == ',':
                self.index += 1
                self.keyword(params)
        self.expect(')', "',' or ')'")

        if not cls.stationary and 'ls' in params:
            # checked, then dropped: linear, white and bias have no lengthscale
            _check_lengthscale(params.pop('ls'))
        return cls(**params)

    def keyword(self, params):
        token = self.current
        if token.kind != 'name' or token.text not in ('ls', 'var'):
            raise self.error("'ls' or 'var'")
        if token.text in params:
            raise self.error('each of ls, var at most once')
        self.index += 1
        self.expect('=', "'='")
        number = self.expect('number', 'a number')
        params[token.text] = float(number.text)


def parse_kernel(text):
    """Parse kernel text.

    Args:
        text (str): Kernel expression, e.g.
            ``"matern32(ls=2, var=1.5) + white(var=0.1)"``.

    Returns:
        `Kernel`: The kernel tree.

    Raises:
        KernelSyntaxError: The text does not follow the grammar.
        UnknownKernelName: A kernel name is not in `CATALOG`.
        InvalidHyperparameter: ``ls <= 0``, ``var < 0``, or ``ls`` given to a
            non-stationary kernel.
    """
    kernel = _Parser(text).parse()
    logger.debug('parsed kernel: ' + print_kernel(kernel))
    return kernel


def _format_number(value):
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def print_kernel(k):
    """Print a kernel in canonical text form.

    Every leaf is printed with explicit hyperparameters and floats are printed
    in shortest round-trip form, so ``parse_kernel(print_kernel(k)) == k``.

    Args:
        k (`Kernel`): Kernel expression.

    Returns:
        str: Canonical kernel text.
    """
    if isinstance(k, _Node):
        left = print_kernel(k.left)
        right = print_kernel(k.right)
        if isinstance(k, Product):
            if isinstance(k.left, Sum):
                left = '(' + left + ')'
            if isinstance(k.right, _Node):
                right = '(' + right + ')'
        elif isinstance(k.right, Sum):
            right = '(' + right + ')'
        return left + ' ' + k.symbol + ' ' + right

    if k.stationary:
        return '{}(ls={}, var={})'.format(k.name,
                                          _format_number(k.lengthscale),
                                          _format_number(k.variance))
    return '{}(var={})'.format(k.name, _format_number(k.variance))
