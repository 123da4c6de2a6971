from django.test import SimpleTestCase

from hermitia import __version__


class CurvatureApiTests(SimpleTestCase):
    def test_scalars_of_the_flat_metric(self):
        response = self.client.get("/api/curvature", {"metric": "flat", "what": "scalars"})
        self.assertEqual(response.status_code, 200)
        body = response.json()
        self.assertEqual(body["version"], __version__)
        self.assertEqual(body["points"][0]["scalars"]["S_ch"], {"re": 0.0, "im": 0.0})

    def test_repeated_points(self):
        response = self.client.get(
            "/api/curvature?metric=hopf&what=ricci2&point=1,0,0,0&point=0,1,0,0"
        )
        self.assertEqual(response.status_code, 200)
        self.assertEqual(len(response.json()["points"]), 2)

    def test_missing_metric(self):
        response = self.client.get("/api/curvature")
        self.assertEqual(response.status_code, 400)
        self.assertEqual(response.json(), {"errors": ["missing metric parameter"]})

    def test_domain_error(self):
        response = self.client.get("/api/curvature", {"metric": "hopf", "point": "0,0,0,0"})
        self.assertEqual(response.status_code, 400)
        self.assertIn("undefined", response.json()["errors"][0])

    def test_files_are_not_read(self):
        response = self.client.get("/api/curvature", {"metric": "flat", "metric-file": "/etc/passwd"})
        self.assertEqual(response.status_code, 200)
        self.assertIsNone(response.json()["config"]["metric_file"])


class CheckApiTests(SimpleTestCase):
    def test_hopf(self):
        response = self.client.get("/api/check", {"metric": "hopf", "sample": 3})
        self.assertEqual(response.status_code, 200)
        body = response.json()
        self.assertTrue(body["verdicts"]["skt"])
        self.assertIn("checklist", body)

    def test_bad_option(self):
        response = self.client.get("/api/check", {"metric": "flat", "connection": "weyl"})
        self.assertEqual(response.status_code, 400)


class HopfApiTests(SimpleTestCase):
    def test_self_similar(self):
        response = self.client.get("/api/hopf/self-similar", {"dim": 3, "mu": 0.5, "T": 2, "steps": 4})
        self.assertEqual(response.status_code, 200)
        body = response.json()
        self.assertEqual(body["n"], 3)
        self.assertEqual(body["c"], [1.0] * 5)
        self.assertIsNone(body["extinction_time"])

    def test_nonpositive_scale(self):
        response = self.client.get("/api/hopf/self-similar", {"c0": 0})
        self.assertEqual(response.status_code, 400)
