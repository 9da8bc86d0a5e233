// The steering loop: tune weights, deform, look, tune again. This module
// owns the only mutable SteeringState and is the only caller of the API
// client, so a scripted interaction maps one-to-one onto HTTP requests.

import { ApiError, Client, DeformRequest, SnakeParamsJson } from "./api.js";
import {
  IterationMode,
  SteeringState,
  Weights,
  appendEntry,
  initialState,
  setCursor,
  setWeight,
} from "./state.js";

export type Listener = (state: SteeringState) => void;

export class SteeringController {
  private readonly client: Client;
  private state: SteeringState;
  private readonly listeners: Listener[] = [];

  constructor(client: Client) {
    this.client = client;
    this.state = initialState();
  }

  getState(): SteeringState {
    return this.state;
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private commit(next: SteeringState): void {
    this.state = next;
    for (const l of this.listeners) l(this.state);
  }

  // -- session setup -------------------------------------------------------

  async synthesize(body: {
    preset?: string;
    spec?: Record<string, unknown>;
    periods?: number;
    seed?: number;
  }): Promise<void> {
    if (this.state.pending) return;
    this.commit({ ...this.state, pending: true, banner: null });
    try {
      const resp = await this.client.synthesize(body);
      this.commit({
        ...initialState(),
        sessionId: resp.session_id,
        imageB64: resp.pgm_base64,
        imageWidth: resp.ground_truth.edges.length,
        imageHeight: this.state.imageHeight,
        groundTruth: resp.ground_truth,
        vstring: resp.vstring,
        midline: resp.ground_truth.midline,
        bandHalfwidth: this.state.bandHalfwidth,
        weights: this.state.weights,
        mode: this.state.mode,
      });
    } catch (err) {
      this.fail(err);
    }
  }

  async upload(file: Blob, name?: string): Promise<void> {
    if (this.state.pending) return;
    this.commit({ ...this.state, pending: true, banner: null });
    try {
      const resp = await this.client.uploadSession(file, name);
      this.commit({
        ...initialState(),
        sessionId: resp.session_id,
        imageWidth: resp.width,
        imageHeight: resp.height,
        midline: resp.midline_estimate,
        bandHalfwidth: this.state.bandHalfwidth,
        weights: this.state.weights,
        mode: this.state.mode,
      });
    } catch (err) {
      this.fail(err);
    }
  }

  // -- steering ------------------------------------------------------------

  setWeight(name: keyof Weights, value: number): void {
    this.commit(setWeight(this.state, name, value));
  }

  setMode(mode: IterationMode): void {
    this.commit({ ...this.state, mode });
  }

  setMidline(midline: number): void {
    this.commit({ ...this.state, midline });
  }

  setBandHalfwidth(bandHalfwidth: number): void {
    this.commit({ ...this.state, bandHalfwidth });
  }

  setOverlay(name: keyof SteeringState["overlays"], on: boolean): void {
    this.commit({ ...this.state, overlays: { ...this.state.overlays, [name]: on } });
  }

  /** Revisit an older result; the next deform branches from it. */
  selectHistory(id: number): void {
    this.commit(setCursor(this.state, id));
  }

  dismissBanner(): void {
    this.commit({ ...this.state, banner: null });
  }

  /** One DP iteration; the session keeps state so the next step continues. */
  step(): Promise<void> {
    return this.deform(true);
  }

  /** Iterate until the snake stops moving (or the iteration cap). */
  runToConvergence(maxIter = 50): Promise<void> {
    return this.deform(false, maxIter);
  }

  private paramsJson(): SnakeParamsJson {
    const { alpha, beta, gamma } = this.state.weights;
    return { alpha, beta, gamma };
  }

  private async deform(stepMode: boolean, maxIter?: number): Promise<void> {
    const s = this.state;
    if (s.pending || s.sessionId === null) return;
    if (s.midline === null) {
      this.commit({ ...s, banner: "set a midline before deforming" });
      return;
    }

    // Continuing from the newest entry reuses the session's stored state.
    // Anything else (first deform, or branching from an older entry) must
    // restart explicitly so old results are never rewritten.
    const atTip = s.cursor !== null && s.cursor === s.history.length - 1;
    const request: DeformRequest = { params: this.paramsJson() };
    if (!atTip) {
      request.init = { midline: s.midline, band_halfwidth: s.bandHalfwidth };
    }
    if (stepMode) {
      request.step_mode = true;
    } else if (maxIter !== undefined) {
      request.max_iter = maxIter;
    }

    this.commit({ ...s, pending: true, banner: null });
    try {
      const response = await this.client.deform(s.sessionId, request);
      this.commit(
        appendEntry(
          { ...this.state, pending: false },
          { parent: s.cursor, params: request.params, stepMode, response },
        ),
      );
    } catch (err) {
      this.fail(err);
    }
  }

  private fail(err: unknown): void {
    const banner =
      err instanceof ApiError ? `${err.code}: ${err.detail}` : String(err);
    this.commit({ ...this.state, pending: false, banner });
  }
}
