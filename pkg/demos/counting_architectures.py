"""
Sizing detector variants without building them
==============================================

Every (width multiplier, resolution) pair determines a concrete detection
network. The counts below come from a closed-form walk over that structure;
no tensors are allocated anywhere.
"""

from archdse import Theta, build_graph, count_macs, count_params, feature_source_channels

# One design point in full detail.
graph = build_graph(Theta(alpha=1.0, resolution=224), num_classes=21)
print("layers in the graph:", len(graph.layers))
print("trainable parameters:", count_params(graph))
print("multiply-accumulates per image:", count_macs(graph))
print("detection head sees channels:", feature_source_channels(graph))

# Width scales parameters; resolution scales compute. The table shows the
# two knobs acting almost independently.
print("\n width   res     params_m      macs_m")
for alpha in (0.35, 0.75, 1.0, 1.3):
    for resolution in (96, 160, 224):
        g = build_graph(Theta(alpha, resolution))
        print(
            f"  {alpha:4.2f}   {resolution:3d}    {count_params(g) / 1e6:9.6f}   {count_macs(g) / 1e6:9.1f}"
        )

# Parameters do not depend on resolution at all; only the head's feature map
# sides change, and those carry no weights.
p96 = count_params(build_graph(Theta(1.0, 96)))
p224 = count_params(build_graph(Theta(1.0, 224)))
print("\nparams at 96 and 224 pixels:", p96, p224, "(equal:", p96 == p224, ")")

# The heavier standard head, for comparison against the depthwise one.
lite = count_params(build_graph(Theta(1.0, 224), head_style="ssdlite"))
full = count_params(build_graph(Theta(1.0, 224), head_style="ssd"))
print("depthwise-head params:", lite)
print("standard-head params: ", full)
