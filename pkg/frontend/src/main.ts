import { ServiceClient } from "./api";
import { DispatchConsole } from "./console";

const root = document.getElementById("console-root");
if (root) {
  new DispatchConsole(root, new ServiceClient()).start();
}
