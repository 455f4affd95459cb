"""Layer graphs with named layers, explicit predecessors and declared output heads."""

from collections import defaultdict
from dataclasses import dataclass

from sepvote.autodiff.rng import Rng
from sepvote.autodiff.tensor import Tensor
from sepvote.errors import ShapeError
from sepvote.nn.layers import Layer, Shape

INPUT = "Input"


@dataclass(frozen=True)
class LayerRow:
    """One row of a layer listing: name, output shape and the layer it reads from."""

    name: str
    kind: str
    output_shape: Shape
    previous: str
    layer: Layer | None = None


class ModelSpec:
    """
    Directed layer graph in insertion order.

    Layers are appended with `add`; unless a predecessor is named, each layer reads the output of
    the layer added just before it. Names default to `<kind>_<n>` numbered per kind, which yields
    listings such as "Conv2D_1, BatchNorm_1, MaxPooling_1".

    Attributes:
        name: Model name used in summaries.
        input_shape: Per-sample input shape `[h, w, c]`.
        size_agnostic: Accept any spatial size with the declared channel count.
        outputs: Names of the layers whose outputs are returned by `forward`.
    """

    def __init__(self, name: str, input_shape: Shape, size_agnostic: bool = False) -> None:
        self.name = name
        self.size_agnostic = size_agnostic
        self.input_shape = tuple(input_shape)
        self.layers: list[Layer] = []
        self.outputs: list[str] = []
        self._previous: dict[str, str] = {}
        self._by_name: dict[str, Layer] = {}
        self._counters: dict[str, int] = defaultdict(int)
        self.built = False

    def add(self, layer: Layer, previous: str | None = None) -> str:
        """
        Append `layer` and return its name.

        Raises:
            ValueError: The predecessor is unknown or the name is already taken.
        """
        if layer.name is None:
            self._counters[layer.kind] += 1
            layer.name = f"{layer.kind}_{self._counters[layer.kind]}"
        if layer.name in self._by_name or layer.name == INPUT:
            raise ShapeError(f"Duplicate layer name '{layer.name}' in {self.name}")
        if previous is None:
            previous = self.layers[-1].name if self.layers else INPUT
        if previous != INPUT and previous not in self._by_name:
            raise ShapeError(f"Unknown predecessor '{previous}' for layer '{layer.name}'")
        self.layers.append(layer)
        self._by_name[layer.name] = layer  # type: ignore[index]
        self._previous[layer.name] = previous  # type: ignore[index]
        return layer.name  # type: ignore[return-value]

    def mark_output(self, *names: str) -> None:
        for name in names:
            if name not in self._by_name:
                raise ShapeError(f"Unknown output layer '{name}'")
            self.outputs.append(name)

    def layer(self, name: str) -> Layer:
        return self._by_name[name]

    def previous(self, name: str) -> str:
        return self._previous[name]

    def shapes(self) -> dict[str, Shape]:
        """
        Per-sample output shape of every layer, computed from the input shape alone.

        Raises:
            ValueError: Consecutive layer shapes do not compose.
        """
        shapes: dict[str, Shape] = {INPUT: self.input_shape}
        for layer in self.layers:
            shapes[layer.name] = layer.output_shape(shapes[self._previous[layer.name]])  # type: ignore[index]
        return shapes

    def rows(self) -> list[LayerRow]:
        """Layer listing including the leading Input row."""
        shapes = self.shapes()
        out = [LayerRow(INPUT, INPUT, self.input_shape, "")]
        for layer in self.layers:
            name = layer.name or ""
            out.append(LayerRow(name, layer.kind, shapes[name], self._previous[name], layer))
        return out

    def output_shapes(self) -> list[Shape]:
        shapes = self.shapes()
        return [shapes[name] for name in self.outputs]

    def build(self, rng: Rng, dtype: str = "f32") -> "ModelSpec":
        """Allocate every layer's parameters; each layer draws from its own child generator."""
        shapes: dict[str, Shape] = {INPUT: self.input_shape}
        for index, layer in enumerate(self.layers):
            name = layer.name or ""
            shapes[name] = layer.build(shapes[self._previous[name]], rng.spawn(index), dtype)
        self.built = True
        return self

    def forward(self, x: Tensor, training: bool = False) -> list[Tensor]:
        """
        Run a batch `[n, h, w, c]` through the graph.

        Returns:
            One tensor per declared output, in declaration order.

        Raises:
            ValueError: The model has not been built, or the input shape is wrong.
        """
        if not self.built:
            raise ShapeError(f"Model '{self.name}' must be built before forward")
        got = tuple(x.shape[1:])
        if self.size_agnostic:
            mismatch = len(got) != len(self.input_shape) or got[-1] != self.input_shape[-1]
        else:
            mismatch = got != self.input_shape
        if mismatch:
            raise ShapeError(
                f"Model '{self.name}' expects inputs of shape {self.input_shape}, got {x.shape[1:]}"
            )
        values: dict[str, Tensor] = {INPUT: x}
        for layer in self.layers:
            name = layer.name or ""
            values[name] = layer.forward(values[self._previous[name]], training)
        return [values[name] for name in self.outputs]

    def named_parameters(self) -> dict[str, Tensor]:
        return {
            f"{layer.name}.{key}": tensor
            for layer in self.layers
            for key, tensor in layer.parameters().items()
        }

    def named_buffers(self) -> dict[str, Tensor]:
        return {
            f"{layer.name}.{key}": tensor
            for layer in self.layers
            for key, tensor in layer.buffers().items()
        }

    def __len__(self) -> int:
        return len(self.layers)

    def __repr__(self) -> str:
        return f"ModelSpec(name={self.name!r}, layers={len(self.layers)})"
