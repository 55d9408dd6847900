/** Service client with stale-response discarding.
 *
 * Requests carry the selection version current at launch time; a response
 * arriving after the selection moved on resolves to null and must be
 * dropped by the caller rather than rendered.
 */

import type {
  DiffPayload,
  InfluencePayload,
  MatrixPayload,
  MdsPayload,
  SlicePayload,
  StarsPayload,
  StudyPayload,
} from "./types.js";

export type FetchLike = (url: string) => Promise<unknown>;

const defaultFetch: FetchLike = async (url) => {
  const response = await fetch(url);
  if (!response.ok) {
    throw new Error(`${url}: ${response.status} ${await response.text()}`);
  }
  return response.json();
};

export class ServiceClient {
  constructor(
    private baseUrl: string,
    private currentVersion: () => number,
    private fetchImpl: FetchLike = defaultFetch,
  ) {}

  /** Resolves to null when the selection version moved on mid-flight. */
  private async get<T>(path: string): Promise<T | null> {
    const launched = this.currentVersion();
    const payload = (await this.fetchImpl(this.baseUrl + path)) as T;
    return this.currentVersion() === launched ? payload : null;
  }

  study() {
    return this.get<StudyPayload>("/study");
  }

  matrix() {
    return this.get<MatrixPayload>("/matrix");
  }

  influence(param: string, char: string, selected: number[]) {
    const sel = selected.length ? `&selected=${selected.join(",")}` : "";
    return this.get<InfluencePayload>(
      `/influence?param=${encodeURIComponent(param)}&char=${encodeURIComponent(char)}${sel}`,
    );
  }

  mds() {
    return this.get<MdsPayload>("/mds");
  }

  stars(selected: number[]) {
    const sel = selected.length ? `?selected=${selected.join(",")}` : "";
    return this.get<StarsPayload>(`/stars${sel}`);
  }

  spatial(axis: string, index: number) {
    return this.get<SlicePayload>(`/spatial?slice=${axis},${index}`);
  }

  spatialResult(id: number, axis: string, index: number) {
    return this.get<SlicePayload>(`/spatial/result/${id}?slice=${axis},${index}`);
  }

  diff(ref: number, other: number, fibers: number[]) {
    return this.get<DiffPayload>(`/diff?ref=${ref}&other=${other}&fibers=${fibers.join(",")}`);
  }
}
