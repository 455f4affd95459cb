"""Layer listings with output shapes and parameter counts."""

import copy
from dataclasses import dataclass

from sepvote.autodiff.rng import Rng
from sepvote.models.base import Detector
from sepvote.models.spec import ModelSpec
from sepvote.nn.layers import Layer, Shape

HEADER = ("Layer name", "Output shape", "Kernel", "Activation", "Previous layer", "Params")


@dataclass(frozen=True)
class SummaryRow:
    name: str
    output_shape: Shape
    kernel: tuple[int, int] | None
    activation: str
    previous: str
    trainable: int
    non_trainable: int

    @property
    def params(self) -> int:
        return self.trainable + self.non_trainable


@dataclass(frozen=True)
class ModelSummary:
    """
    Deterministic per-layer report.

    Parameter counts are computed from layer hyperparameters and input shapes, so an unbuilt
    graph can be summarised. Batch-norm running statistics count as non-trainable parameters.
    """

    title: str
    rows: tuple[SummaryRow, ...]

    @property
    def trainable(self) -> int:
        return sum(r.trainable for r in self.rows)

    @property
    def non_trainable(self) -> int:
        return sum(r.non_trainable for r in self.rows)

    @property
    def total(self) -> int:
        return self.trainable + self.non_trainable

    def row(self, name: str) -> SummaryRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def render(self) -> str:
        """Plain-text table followed by the parameter totals."""
        body = [HEADER] + [
            (
                r.name,
                format_shape(r.output_shape),
                f"({r.kernel[0]},{r.kernel[1]})" if r.kernel else "",
                r.activation,
                r.previous,
                f"{r.params:,}" if r.params else "",
            )
            for r in self.rows
        ]
        widths = [max(len(line[i]) for line in body) for i in range(len(HEADER))]
        lines = [self.title]
        for line in body:
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip())
        lines.append(f"Total params: {self.total:,}")
        lines.append(f"Trainable params: {self.trainable:,}")
        lines.append(f"Non-trainable params: {self.non_trainable:,}")
        return "\n".join(lines)


def format_shape(shape: Shape) -> str:
    return " x ".join(str(d) for d in shape)


def layer_param_counts(layer: Layer, input_shape: Shape) -> tuple[int, int]:
    """(trainable, non-trainable) parameter counts of `layer` applied to `input_shape`."""
    if layer.parameters() or layer.buffers():
        return layer.trainable_count, layer.non_trainable_count
    # Unbuilt layers are sized on a throwaway copy; the layer itself stays unbuilt.
    probe = copy.deepcopy(layer)
    probe.build(input_shape, Rng(0), "f32")
    return probe.trainable_count, probe.non_trainable_count


def _spec_rows(spec: ModelSpec, prefix: str = "") -> list[SummaryRow]:
    shapes = spec.shapes()
    rows = [] if prefix else [SummaryRow("Input", spec.input_shape, None, "", "", 0, 0)]
    for layer in spec.layers:
        name = layer.name or ""
        previous = spec.previous(name)
        trainable, frozen = layer_param_counts(layer, shapes[previous])
        rows.append(
            SummaryRow(
                f"{prefix}{name}",
                shapes[name],
                layer.kernel_size,
                layer.activation_name,
                f"{prefix}{previous}" if prefix and previous != "Input" else previous,
                trainable,
                frozen,
            )
        )
    return rows


def model_summary(model: ModelSpec | Detector) -> ModelSummary:
    """
    Summarise a layer graph, or every component of a detector.

    Detector components are listed in order with their names as prefixes, e.g.
    "head_0/Residual_1". A graph with no layers has a total of 0.
    """
    if isinstance(model, ModelSpec):
        return ModelSummary(model.name, tuple(_spec_rows(model)))
    rows: list[SummaryRow] = []
    for prefix, spec in model.components():
        rows.extend(_spec_rows(spec, f"{prefix}/"))
    title = f"{model.arch} ({model.scheme.name}, profile {model.profile.name})"
    return ModelSummary(title, tuple(rows))
