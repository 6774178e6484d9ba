import { describe, expect, it } from "vitest";

import { buildRenderRequest, postRender, type FetchLike } from "../src/api.js";
import { defaultState, type ViewerState } from "../src/state.js";

function viewing(patch: Partial<ViewerState> = {}): ViewerState {
	return { ...defaultState(), dataset: "blobs", ...patch };
}

/**
 * Minimal stand-in for the render service: caches attenuation buffers by the
 * same key the real service uses and reports X-Build-Ms accordingly.
 */
function mockService(): { fetch: FetchLike; builds: number } {
	const cache = new Set<string>();
	const state = {
		builds: 0,
		fetch: (async (_url: string, init?: RequestInit) => {
			const body = JSON.parse(String(init?.body));
			const key = JSON.stringify([
				body.dataset,
				body.transfer_function,
				body.light,
				body.n_slices,
				body.buffer_resolution,
			]);
			const hit = cache.has(key);
			if (!hit) {
				cache.add(key);
				state.builds += 1;
			}
			return new Response(new Blob([new Uint8Array([137, 80, 78, 71])]), {
				status: 200,
				headers: {
					"Content-Type": "image/png",
					"X-Build-Ms": hit ? "0.000" : "42.000",
					"X-Render-Ms": "7.000",
				},
			});
		}) as FetchLike,
	};
	return state;
}

describe("request assembly", () => {
	it("fills the service schema", () => {
		const req = buildRenderRequest(viewing());
		expect(req.dataset).toBe("blobs");
		expect(req.viewport).toEqual([448, 448]);
		expect(req.buffer_resolution).toEqual([256, 256]);
		expect(req.step).toBeCloseTo(1 / 256);
		expect(req.camera.target).toEqual([0.5, 0.5, 0.5]);
		const norm = Math.hypot(...req.light.direction);
		expect(norm).toBeCloseTo(1);
	});

	it("requires a dataset", () => {
		expect(() => buildRenderRequest(defaultState())).toThrow(/dataset/);
	});

	it("camera orbit does not touch buffer-shaping fields", () => {
		const a = buildRenderRequest(viewing());
		const b = buildRenderRequest(
			viewing({ camera: { azimuthDeg: 200, elevationDeg: -40, distance: 3.1 } }),
		);
		expect(b.camera).not.toEqual(a.camera);
		expect(b.light).toEqual(a.light);
		expect(b.n_slices).toBe(a.n_slices);
		expect(b.buffer_resolution).toEqual(a.buffer_resolution);
		expect(b.transfer_function).toBe(a.transfer_function);
	});
});

describe("buffer-cache visibility (mirrors the service contract)", () => {
	it("camera-only change reports build 0; light change rebuilds", async () => {
		const svc = mockService();

		const first = await postRender(buildRenderRequest(viewing()), svc.fetch);
		expect(first.buildMs).toBeGreaterThan(0);

		const cameraOnly = viewing({ camera: { azimuthDeg: 99, elevationDeg: 5, distance: 2.0 } });
		const second = await postRender(buildRenderRequest(cameraOnly), svc.fetch);
		expect(second.buildMs).toBe(0);

		const lightMoved = viewing({ light: { azimuthDeg: 10, elevationDeg: -30 } });
		const third = await postRender(buildRenderRequest(lightMoved), svc.fetch);
		expect(third.buildMs).toBeGreaterThan(0);
		expect(svc.builds).toBe(2);
	});

	it("slice or resolution changes rebuild", async () => {
		const svc = mockService();
		await postRender(buildRenderRequest(viewing()), svc.fetch);
		await postRender(buildRenderRequest(viewing({ nSlices: 256 })), svc.fetch);
		await postRender(buildRenderRequest(viewing({ bufferRes: 128 })), svc.fetch);
		expect(svc.builds).toBe(3);
	});

	it("raises on http errors", async () => {
		const failing: FetchLike = async () => new Response("nope", { status: 503 });
		await expect(postRender(buildRenderRequest(viewing()), failing)).rejects.toThrow(/503/);
	});
});
