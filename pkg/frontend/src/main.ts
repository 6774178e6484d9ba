/** DOM wiring for the viewer page. */

import {
	buildRenderRequest,
	fetchDatasets,
	postRender,
	type FrameResponse,
	type RenderRequestBody,
	VIEWPORT,
} from "./api.js";
import { diffPixels } from "./compare.js";
import { FramePipeline } from "./scheduler.js";
import {
	clampState,
	defaultState,
	parseState,
	serializeState,
	SHADING_MODES,
	STEP_DENOMINATORS,
	TF_PRESETS,
	type ShadingMode,
	type ViewerState,
} from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
	const el = document.getElementById(id);
	if (!el) throw new Error(`missing element #${id}`);
	return el as T;
};

let state: ViewerState = window.location.search.length > 1
	? parseState(window.location.search)
	: defaultState();

const leftImage = $<HTMLImageElement>("frame-left");
const rightImage = $<HTMLImageElement>("frame-right");
const rightPanel = $<HTMLDivElement>("panel-right");
const diffCanvas = $<HTMLCanvasElement>("diff-canvas");
const banner = $<HTMLDivElement>("error-banner");
const timings = $<HTMLSpanElement>("timings");

function showError(err: unknown): void {
	banner.textContent = String(err instanceof Error ? err.message : err);
	banner.classList.add("visible");
}

function clearError(): void {
	banner.classList.remove("visible");
}

function displayFrame(img: HTMLImageElement, frame: FrameResponse): void {
	const url = URL.createObjectURL(frame.bytes);
	const old = img.dataset.url;
	img.onload = () => {
		if (old) URL.revokeObjectURL(old);
	};
	img.src = url;
	img.dataset.url = url;
	clearError();
}

const leftPipeline = new FramePipeline<RenderRequestBody, FrameResponse>(
	(req) => postRender(req),
	({ result }) => {
		displayFrame(leftImage, result);
		timings.textContent =
			`build ${result.buildMs.toFixed(1)} ms | render ${result.renderMs.toFixed(1)} ms`;
		scheduleDiff();
	},
	showError,
);

const rightPipeline = new FramePipeline<RenderRequestBody, FrameResponse>(
	(req) => postRender(req),
	({ result }) => {
		displayFrame(rightImage, result);
		scheduleDiff();
	},
	showError,
);

function pushFrames(immediate = false): void {
	if (state.dataset === null) return;
	const send = (p: FramePipeline<RenderRequestBody, FrameResponse>, req: RenderRequestBody) =>
		immediate ? p.flush(req) : p.request(req);
	send(leftPipeline, buildRenderRequest(state));
	if (state.compareWith !== null) {
		rightPanel.classList.add("visible");
		send(rightPipeline, buildRenderRequest(state, state.compareWith));
	} else {
		rightPanel.classList.remove("visible");
	}
	history.replaceState(null, "", `?${serializeState(state)}`);
}

function update(patch: Partial<ViewerState>, immediate = false): void {
	state = clampState({ ...state, ...patch });
	syncControls();
	pushFrames(immediate);
}

// Difference overlay: recomputed when both panels have frames.
let diffArmed = false;
function scheduleDiff(): void {
	if (!diffArmed || state.compareWith === null) return;
	if (!leftImage.complete || !rightImage.complete) return;
	const ctx = diffCanvas.getContext("2d");
	if (!ctx) return;
	const scratch = document.createElement("canvas");
	scratch.width = scratch.height = VIEWPORT;
	const sctx = scratch.getContext("2d");
	if (!sctx) return;
	sctx.drawImage(leftImage, 0, 0, VIEWPORT, VIEWPORT);
	const a = sctx.getImageData(0, 0, VIEWPORT, VIEWPORT);
	sctx.clearRect(0, 0, VIEWPORT, VIEWPORT);
	sctx.drawImage(rightImage, 0, 0, VIEWPORT, VIEWPORT);
	const b = sctx.getImageData(0, 0, VIEWPORT, VIEWPORT);
	const { out } = diffPixels(a.data, b.data);
	diffCanvas.width = diffCanvas.height = VIEWPORT;
	const overlay = new ImageData(VIEWPORT, VIEWPORT);
	overlay.data.set(out);
	ctx.putImageData(overlay, 0, 0);
}

// ---- controls -------------------------------------------------------------

const datasetSelect = $<HTMLSelectElement>("dataset");
const shadingSelect = $<HTMLSelectElement>("shading");
const compareSelect = $<HTMLSelectElement>("compare");
const tfSelect = $<HTMLSelectElement>("tf");
const stepSelect = $<HTMLSelectElement>("step");
const slicesInput = $<HTMLInputElement>("slices");
const slicesOut = $<HTMLSpanElement>("slices-value");
const resInput = $<HTMLInputElement>("res");
const resOut = $<HTMLSpanElement>("res-value");

function fillSelect(sel: HTMLSelectElement, values: readonly string[], extra?: string): void {
	sel.innerHTML = "";
	if (extra !== undefined) {
		const opt = document.createElement("option");
		opt.value = "";
		opt.textContent = extra;
		sel.appendChild(opt);
	}
	for (const v of values) {
		const opt = document.createElement("option");
		opt.value = v;
		opt.textContent = v;
		sel.appendChild(opt);
	}
}

fillSelect(shadingSelect, SHADING_MODES);
fillSelect(compareSelect, SHADING_MODES, "off");
fillSelect(tfSelect, TF_PRESETS);
fillSelect(stepSelect, STEP_DENOMINATORS.map((d) => `1/${d}`));

function syncControls(): void {
	if (state.dataset !== null) datasetSelect.value = state.dataset;
	shadingSelect.value = state.shading;
	compareSelect.value = state.compareWith ?? "";
	tfSelect.value = state.tfPreset;
	stepSelect.value = `1/${state.stepDenominator}`;
	slicesInput.value = String(state.nSlices);
	slicesOut.textContent = String(state.nSlices);
	resInput.value = String(state.bufferRes);
	resOut.textContent = `${state.bufferRes} x ${state.bufferRes}`;
}

datasetSelect.addEventListener("change", () => update({ dataset: datasetSelect.value }, true));
shadingSelect.addEventListener("change", () =>
	update({ shading: shadingSelect.value as ShadingMode }, true));
compareSelect.addEventListener("change", () =>
	update({ compareWith: compareSelect.value === "" ? null : (compareSelect.value as ShadingMode) }, true));
tfSelect.addEventListener("change", () => update({ tfPreset: tfSelect.value as ViewerState["tfPreset"] }, true));
stepSelect.addEventListener("change", () =>
	update({ stepDenominator: Number(stepSelect.value.split("/")[1]) as ViewerState["stepDenominator"] }, true));
slicesInput.addEventListener("input", () => update({ nSlices: Number(slicesInput.value) }));
resInput.addEventListener("input", () => update({ bufferRes: Number(resInput.value) }));

$<HTMLButtonElement>("diff-toggle").addEventListener("click", () => {
	diffArmed = !diffArmed;
	diffCanvas.classList.toggle("visible", diffArmed);
	scheduleDiff();
});

// Orbit drags: plain drag orbits the camera, shift-drag moves the light.
let dragging: "camera" | "light" | null = null;
let lastX = 0;
let lastY = 0;

leftImage.addEventListener("pointerdown", (ev) => {
	dragging = ev.shiftKey ? "light" : "camera";
	lastX = ev.clientX;
	lastY = ev.clientY;
	leftImage.setPointerCapture(ev.pointerId);
});
leftImage.addEventListener("pointermove", (ev) => {
	if (dragging === null) return;
	const dx = ev.clientX - lastX;
	const dy = ev.clientY - lastY;
	lastX = ev.clientX;
	lastY = ev.clientY;
	if (dragging === "camera") {
		update({
			camera: {
				...state.camera,
				azimuthDeg: state.camera.azimuthDeg + dx * 0.5,
				elevationDeg: state.camera.elevationDeg + dy * 0.5,
			},
		});
	} else {
		update({
			light: {
				azimuthDeg: state.light.azimuthDeg + dx * 0.5,
				elevationDeg: state.light.elevationDeg - dy * 0.5,
			},
		});
	}
});
leftImage.addEventListener("pointerup", () => {
	dragging = null;
});
leftImage.addEventListener("wheel", (ev) => {
	ev.preventDefault();
	update({
		camera: { ...state.camera, distance: state.camera.distance * (ev.deltaY > 0 ? 1.1 : 0.9) },
	});
});

// ---- boot -----------------------------------------------------------------

async function boot(): Promise<void> {
	try {
		const datasets = await fetchDatasets();
		fillSelect(datasetSelect, datasets.map((d) => d.id));
		if (datasets.length === 0) {
			showError("no datasets available; run `slicecast serve --data-dir ...` with raw files");
			return;
		}
		const first = datasets[0];
		if (state.dataset === null || !datasets.some((d) => d.id === state.dataset)) {
			state = { ...state, dataset: first ? first.id : null };
		}
		syncControls();
		pushFrames(true);
	} catch (err) {
		showError(err);
	}
}

void boot();
