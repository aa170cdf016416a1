import os
import tempfile
import uuid
from unittest import TestCase

from sgpivot.exceptions import GraphFormatError, SceneGraphValidationError
from sgpivot.scene_graph import SceneGraph, canonical_form, check, deserialize, isomorphic, is_valid, load, save
from sgpivot.scene_graph import serialize, validate
from ...data import boy_kicks_ball


def boy_kicks_ball_graph(modality="language"):
    return SceneGraph(modality, [(0, "object", "boy"), (1, "relation", "kick"), (2, "object", "ball")],
                      [(0, 1), (1, 2)])


class TestSceneGraph(TestCase):
    def test_accessors(self):
        g = boy_kicks_ball_graph()
        self.assertEqual(g.num_nodes, 3)
        self.assertEqual(g.objects(), [0, 2])
        self.assertEqual(g.relation_endpoints(1), (0, 2))
        self.assertEqual(g.kind_counts(), {"object": 2, "attribute": 0, "relation": 1})
        self.assertEqual(g.labels(), ["boy", "kick", "ball"])

    def test_immutable(self):
        g = boy_kicks_ball_graph()
        with self.assertRaises(AttributeError):
            g.modality = "visual"

    def test_unknown_modality(self):
        with self.assertRaises(ValueError):
            SceneGraph("audio", [(0, "object", "boy")], [])

    def test_valid_graphs(self):
        self.assertEqual(validate(boy_kicks_ball_graph()), [])
        self.assertTrue(is_valid(SceneGraph("visual", [(0, "object", "sky")], [])))
        g = SceneGraph("visual", [(0, "object", "car"), (1, "attribute", "red"), (2, "object", "sky")], [(0, 1)])
        self.assertTrue(is_valid(g))

    def test_no_object(self):
        g = SceneGraph("language", [(0, "attribute", "red")], [])
        self.assertIn("no Object node", validate(g))

    def test_object_to_object_edge(self):
        g = SceneGraph("language", [(0, "object", "boy"), (1, "object", "ball")], [(0, 1)])
        self.assertTrue(any("without a relation node" in v for v in validate(g)))

    def test_relation_needs_two_endpoints(self):
        g = SceneGraph("language", [(0, "object", "boy"), (1, "relation", "kick")], [(0, 1)])
        with self.assertRaises(SceneGraphValidationError) as ctx:
            check(g)
        self.assertTrue(any("relation node 1" in v for v in ctx.exception.violations))

    def test_attribute_with_outgoing_edge(self):
        g = SceneGraph("language", [(0, "object", "boy"), (1, "attribute", "old"), (2, "relation", "x"),
                                    (3, "object", "ball")], [(0, 1), (1, 2), (2, 3)])
        self.assertTrue(any("attribute node 1" in v for v in validate(g)))

    def test_sparse_ids_and_missing_nodes(self):
        g = SceneGraph("language", [(0, "object", "boy"), (2, "object", "ball")], [])
        self.assertTrue(any("dense" in v for v in validate(g)))
        g = SceneGraph("language", [(0, "object", "boy")], [(0, 5)])
        self.assertTrue(any("missing node" in v for v in validate(g)))

    def test_component_limit(self):
        nodes = [(i, "object", f"o{i}") for i in range(4)]
        g = SceneGraph("visual", nodes, [])
        self.assertFalse(is_valid(g))
        self.assertTrue(is_valid(g, max_components=4))
        self.assertTrue(is_valid(g, max_components=None))

    def test_repeated_relation_label(self):
        nodes = [(0, "object", "ball"), (1, "relation", "on"), (2, "relation", "on"), (3, "object", "ground")]
        g = SceneGraph("visual", nodes, [(0, 1), (1, 3), (0, 2), (2, 3)])
        violations = validate(g)
        self.assertEqual(len(violations), 1)
        self.assertIn("relation node 2", violations[0])
        self.assertTrue(is_valid(g.with_labels({2: "near"})))
        self.assertTrue(is_valid(g.with_modality("mixed")))

        # same label between the pair in the other direction is a different relation
        g = SceneGraph("visual", nodes, [(0, 1), (1, 3), (3, 2), (2, 0)])
        self.assertTrue(is_valid(g))


class TestSerialization(TestCase):
    def test_reads_reference_file(self):
        g = load(boy_kicks_ball)
        self.assertEqual(g, boy_kicks_ball_graph())

    def test_canonical_text_is_stable(self):
        g = boy_kicks_ball_graph()
        text = serialize(g)
        self.assertEqual(serialize(deserialize(text)), text)

        shuffled = SceneGraph("language", [(2, "object", "ball"), (0, "object", "boy"), (1, "relation", "kick")],
                              [(1, 2), (0, 1)])
        self.assertEqual(serialize(shuffled), text)

    def test_save_and_load(self):
        file_name = os.path.join(tempfile.gettempdir(), f"sg_{uuid.uuid4().hex}.json")
        g = boy_kicks_ball_graph("visual")
        save(g, file_name)
        try:
            self.assertEqual(load(file_name), g)
        finally:
            os.remove(file_name)

    def test_malformed_json(self):
        with self.assertRaises(GraphFormatError) as ctx:
            deserialize('{"modality": "language", "nodes": [')
        self.assertGreaterEqual(ctx.exception.position, 0)

    def test_unknown_kind_reports_position(self):
        text = '{"modality": "language", "nodes": [{"id": 0, "kind": "thing", "label": "x"}], "edges": []}'
        with self.assertRaises(GraphFormatError) as ctx:
            deserialize(text)
        self.assertEqual(ctx.exception.position, text.find('"thing"'))

    def test_missing_field(self):
        with self.assertRaises(GraphFormatError):
            deserialize('{"modality": "language", "nodes": []}')
        with self.assertRaises(GraphFormatError):
            deserialize('{"modality": "language", "nodes": [{"id": 0, "kind": "object"}], "edges": []}')


class TestIsomorphism(TestCase):
    def test_permutation_invariance(self):
        g = SceneGraph("visual", [(0, "object", "man"), (1, "relation", "beside"), (2, "object", "kite"),
                                  (3, "attribute", "old"), (4, "relation", "in"), (5, "object", "sky")],
                       [(0, 1), (1, 2), (0, 3), (2, 4), (4, 5)])
        for perm in [[5, 4, 3, 2, 1, 0], [1, 0, 2, 4, 3, 5], [2, 3, 4, 5, 0, 1]]:
            p = g.permuted(perm)
            self.assertTrue(is_valid(p))
            self.assertTrue(isomorphic(g, p))
            self.assertEqual(canonical_form(g), canonical_form(p))

    def test_symmetric_graph(self):
        g = SceneGraph("visual", [(0, "object", "dog"), (1, "object", "dog")], [])
        self.assertTrue(isomorphic(g, g.permuted([1, 0])))

    def test_labels_and_directions_matter(self):
        g = boy_kicks_ball_graph()
        self.assertFalse(isomorphic(g, g.with_labels({2: "kite"})))
        reversed_edges = SceneGraph("language", g.nodes, [(2, 1), (1, 0)])
        self.assertFalse(isomorphic(g, reversed_edges))
        self.assertFalse(isomorphic(g, g.with_modality("visual")))

    def test_symmetric_cycles(self):
        def ring(sizes):
            nodes, edges, start = [], [], 0
            for size in sizes:
                for k in range(size):
                    nodes += [(start + 2 * k, "object", "dot"), (start + 2 * k + 1, "relation", "next")]
                    edges += [(start + 2 * k, start + 2 * k + 1),
                              (start + 2 * k + 1, start + (2 * k + 2) % (2 * size))]
                start += 2 * size
            return SceneGraph("visual", nodes, edges)

        triangles, hexagon = ring([3, 3]), ring([6])
        self.assertTrue(is_valid(triangles) and is_valid(hexagon))
        self.assertFalse(isomorphic(triangles, hexagon))
        for perm in [[11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0], [6, 7, 8, 9, 10, 11, 0, 1, 2, 3, 4, 5],
                     [2, 9, 4, 11, 0, 7, 8, 3, 10, 5, 6, 1]]:
            self.assertEqual(canonical_form(triangles), canonical_form(triangles.permuted(perm)))
            self.assertEqual(canonical_form(hexagon), canonical_form(hexagon.permuted(perm)))
